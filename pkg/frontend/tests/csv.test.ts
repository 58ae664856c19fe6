import { describe, expect, it } from "vitest";

import { CsvFormatError, EXPECTED_HEADER, parseEnsembleCsv } from "../src/csv.js";

export function makeCsvText(rows: number, fidelity: (i: number) => number,
                            stderr = 0.01): string {
  const lines = [EXPECTED_HEADER.join(",")];
  for (let i = 0; i < rows; i++) {
    const t = i * 1e-4;
    const cells = [String(t)];
    for (const name of ["sigma_par", "sigma_perp", "sigma_y", "n_boson"]) {
      const value = name === "n_boson" ? 2 + 0.1 * i : Math.cos(0.2 * i);
      cells.push(String(value), String(stderr));
    }
    cells.push(String(fidelity(i)), String(stderr / 10));
    lines.push(cells.join(","));
  }
  return lines.join("\n") + "\n";
}

describe("parseEnsembleCsv", () => {
  it("parses the simulator column contract", () => {
    const series = parseEnsembleCsv(makeCsvText(5, (i) => 1 - 0.01 * i), "x.csv");
    expect(series.t).toHaveLength(5);
    expect(series.mean.fidelity[0]).toBe(1);
    expect(series.mean.n_boson[3]).toBeCloseTo(2.3);
    expect(series.stderr.sigma_par[1]).toBeCloseTo(0.01);
  });

  it("rejects an empty file", () => {
    expect(() => parseEnsembleCsv("", "empty.csv")).toThrow(CsvFormatError);
  });

  it("rejects a header mismatch naming the column", () => {
    const bad = makeCsvText(2, () => 1).replace("mean_n_boson", "mean_phonons");
    expect(() => parseEnsembleCsv(bad, "bad.csv")).toThrow(/mean_n_boson/);
  });

  it("rejects missing data rows", () => {
    const headerOnly = EXPECTED_HEADER.join(",") + "\n";
    expect(() => parseEnsembleCsv(headerOnly, "h.csv")).toThrow(/no data rows/);
  });

  it("rejects non-numeric cells with the column name", () => {
    const bad = makeCsvText(2, () => 1).replace("2.1", "oops");
    expect(() => parseEnsembleCsv(bad, "b.csv")).toThrow(CsvFormatError);
  });

  it("rejects ragged rows", () => {
    const text = makeCsvText(2, () => 1).trimEnd() + ",42\n";
    expect(() => parseEnsembleCsv(text, "r.csv")).toThrow(/cells/);
  });
});
