/** Pinned figure style. Rendering must be a pure function of the inputs and
 * these constants, so regenerated figures are byte-identical. */

export const STYLE = {
  panelWidth: 320,
  panelHeight: 210,
  marginLeft: 58,
  marginRight: 14,
  marginTop: 26,
  marginBottom: 44,
  panelGapX: 10,
  panelGapY: 8,
  fontFamily: "Helvetica, Arial, sans-serif",
  fontSizeLabel: 13,
  fontSizeTick: 11,
  fontSizeTitle: 14,
  axisColor: "#222222",
  gridColor: "#dddddd",
  ideal: { color: "#000000", width: 1.4, dash: "" },
  unprotected: { color: "#c0392b", width: 1.6, dash: "5,3" },
  protected: { color: "#1f5fa8", width: 1.6, dash: "" },
  bandOpacity: 0.25,
  tickLength: 4,
} as const;

export const OBSERVABLE_LABELS: Record<string, string> = {
  sigma_par: "⟨σ∥⟩",
  sigma_perp: "⟨σ⊥⟩",
  sigma_y: "⟨σ_y⟩",
  n_boson: "⟨a†a⟩",
  fidelity: "F",
};

/** Deterministic coordinate formatting (trims trailing zeros). */
export function fmt(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`cannot format non-finite coordinate ${value}`);
  }
  if (value === 0) return "0";
  const s = value.toFixed(2);
  return s.replace(/\.?0+$/, "");
}

/** Tick label formatting. */
export function fmtTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 0.01 && magnitude < 10000) {
    return String(Number(value.toPrecision(4)));
  }
  const exponent = Math.floor(Math.log10(magnitude));
  const mantissa = value / 10 ** exponent;
  return `${String(Number(mantissa.toPrecision(3)))}e${exponent}`;
}
