/** Parsing of ensemble CSV files written by the simulator CLI. */

import { readFileSync } from "node:fs";

export const OBSERVABLES = [
  "sigma_par",
  "sigma_perp",
  "sigma_y",
  "n_boson",
  "fidelity",
] as const;

export type Observable = (typeof OBSERVABLES)[number];

export const EXPECTED_HEADER: readonly string[] = [
  "t",
  ...OBSERVABLES.flatMap((name) => [`mean_${name}`, `stderr_${name}`]),
];

export interface EnsembleSeries {
  /** Source path, kept for error messages. */
  path: string;
  t: number[];
  mean: Record<Observable, number[]>;
  stderr: Record<Observable, number[]>;
}

export class CsvFormatError extends Error {}

/** Parse an ensemble CSV, validating the exact column contract. */
export function parseEnsembleCsv(text: string, path: string): EnsembleSeries {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvFormatError(`${path}: empty CSV`);
  }
  const header = (lines[0] ?? "").split(",").map((s) => s.trim());
  for (let i = 0; i < EXPECTED_HEADER.length; i++) {
    if (header[i] !== EXPECTED_HEADER[i]) {
      throw new CsvFormatError(
        `${path}: column ${i} is '${header[i] ?? "<missing>"}', ` +
          `expected '${EXPECTED_HEADER[i]}'`,
      );
    }
  }
  if (header.length !== EXPECTED_HEADER.length) {
    throw new CsvFormatError(
      `${path}: unexpected extra column '${header[EXPECTED_HEADER.length]}'`,
    );
  }
  if (lines.length < 2) {
    throw new CsvFormatError(`${path}: no data rows`);
  }

  const t: number[] = [];
  const mean = emptyColumns();
  const stderr = emptyColumns();
  for (let row = 1; row < lines.length; row++) {
    const cells = (lines[row] ?? "").split(",");
    if (cells.length !== EXPECTED_HEADER.length) {
      throw new CsvFormatError(
        `${path}: row ${row} has ${cells.length} cells, expected ` +
          `${EXPECTED_HEADER.length}`,
      );
    }
    const values = cells.map((cell, i) => {
      const value = Number(cell);
      if (!Number.isFinite(value)) {
        throw new CsvFormatError(
          `${path}: row ${row}, column '${EXPECTED_HEADER[i]}' is not ` +
            `a finite number: '${cell}'`,
        );
      }
      return value;
    });
    t.push(values[0] as number);
    OBSERVABLES.forEach((name, k) => {
      mean[name].push(values[1 + 2 * k] as number);
      stderr[name].push(values[2 + 2 * k] as number);
    });
  }
  return { path, t, mean, stderr };
}

export function readEnsembleCsv(path: string): EnsembleSeries {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvFormatError(`cannot read CSV '${path}': ${String(err)}`);
  }
  return parseEnsembleCsv(text, path);
}

function emptyColumns(): Record<Observable, number[]> {
  return {
    sigma_par: [],
    sigma_perp: [],
    sigma_y: [],
    n_boson: [],
    fidelity: [],
  };
}
