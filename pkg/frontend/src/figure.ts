/** Figure renderers: multi-panel dynamics grids and the log-scale
 * infidelity comparison, as deterministic SVG. */

import { EnsembleSeries, Observable, readEnsembleCsv } from "./csv.js";
import { Scale, linearScale, logScale } from "./scale.js";
import { OBSERVABLE_LABELS, STYLE, fmt, fmtTick } from "./style.js";
import { escapeXml, polygonPath, polylinePath, tag } from "./svg.js";

export interface PanelSpec {
  /** Observable column to draw. */
  observable: Observable;
  /** CSV paths; any subset of the three curves may be present. */
  unprotected?: string;
  protected?: string;
  ideal?: string;
  /** Optional panel annotation, e.g. "(a)". */
  label?: string;
}

export interface DynamicsFigureSpec {
  panels: PanelSpec[];
  /** Panels per row (default 2: qubit observable left, phonons right). */
  columns?: number;
  title?: string;
  output: string;
}

interface Curve {
  series: EnsembleSeries;
  kind: "ideal" | "unprotected" | "protected";
}

function panelCurves(spec: PanelSpec): Curve[] {
  const curves: Curve[] = [];
  if (spec.ideal) curves.push({ series: readEnsembleCsv(spec.ideal), kind: "ideal" });
  if (spec.unprotected) {
    curves.push({ series: readEnsembleCsv(spec.unprotected), kind: "unprotected" });
  }
  if (spec.protected) {
    curves.push({ series: readEnsembleCsv(spec.protected), kind: "protected" });
  }
  if (curves.length === 0) {
    throw new Error("panel has no input CSVs (need ideal/unprotected/protected)");
  }
  return curves;
}

/** Normalized time axis: each scheme runs for its own total time (the
 * protected realization doubles it), so curves are compared on t/t_total. */
function normalizedTime(series: EnsembleSeries): number[] {
  const tEnd = series.t[series.t.length - 1] ?? 1;
  return series.t.map((t) => (tEnd > 0 ? t / tEnd : t));
}

function curveStyle(kind: Curve["kind"]) {
  return STYLE[kind];
}

function drawAxes(
  x0: number,
  y0: number,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  logY = false,
): string {
  const { panelWidth, panelHeight, marginLeft, marginRight, marginTop, marginBottom } = STYLE;
  const innerW = panelWidth - marginLeft - marginRight;
  const innerH = panelHeight - marginTop - marginBottom;
  const left = x0 + marginLeft;
  const top = y0 + marginTop;
  const parts: string[] = [];
  parts.push(
    tag("rect", [
      ["x", fmt(left)],
      ["y", fmt(top)],
      ["width", fmt(innerW)],
      ["height", fmt(innerH)],
      ["fill", "none"],
      ["stroke", STYLE.axisColor],
      ["stroke-width", 1],
    ]),
  );
  for (const tick of xScale.ticks) {
    const px = xScale.map(tick);
    parts.push(
      tag("line", [
        ["x1", fmt(px)],
        ["y1", fmt(top + innerH)],
        ["x2", fmt(px)],
        ["y2", fmt(top + innerH + STYLE.tickLength)],
        ["stroke", STYLE.axisColor],
        ["stroke-width", 1],
      ]),
      tag(
        "text",
        [
          ["x", fmt(px)],
          ["y", fmt(top + innerH + STYLE.tickLength + STYLE.fontSizeTick + 1)],
          ["text-anchor", "middle"],
          ["font-family", STYLE.fontFamily],
          ["font-size", STYLE.fontSizeTick],
          ["fill", STYLE.axisColor],
        ],
        escapeXml(fmtTick(tick)),
      ),
    );
  }
  for (const tick of yScale.ticks) {
    const py = yScale.map(tick);
    parts.push(
      tag("line", [
        ["x1", fmt(left - STYLE.tickLength)],
        ["y1", fmt(py)],
        ["x2", fmt(left)],
        ["y2", fmt(py)],
        ["stroke", STYLE.axisColor],
        ["stroke-width", 1],
      ]),
      tag(
        "text",
        [
          ["x", fmt(left - STYLE.tickLength - 2)],
          ["y", fmt(py + STYLE.fontSizeTick / 3)],
          ["text-anchor", "end"],
          ["font-family", STYLE.fontFamily],
          ["font-size", STYLE.fontSizeTick],
          ["fill", STYLE.axisColor],
        ],
        escapeXml(logY ? `1e${Math.round(Math.log10(tick))}` : fmtTick(tick)),
      ),
    );
  }
  parts.push(
    tag(
      "text",
      [
        ["x", fmt(left + innerW / 2)],
        ["y", fmt(top + innerH + marginBottom - 8)],
        ["text-anchor", "middle"],
        ["font-family", STYLE.fontFamily],
        ["font-size", STYLE.fontSizeLabel],
        ["fill", STYLE.axisColor],
      ],
      escapeXml(xLabel),
    ),
    tag(
      "text",
      [
        ["x", fmt(x0 + 16)],
        ["y", fmt(top + innerH / 2)],
        ["text-anchor", "middle"],
        ["font-family", STYLE.fontFamily],
        ["font-size", STYLE.fontSizeLabel],
        ["fill", STYLE.axisColor],
        ["transform", `rotate(-90 ${fmt(x0 + 16)} ${fmt(top + innerH / 2)})`],
      ],
      escapeXml(yLabel),
    ),
  );
  return parts.join("");
}

function renderPanel(spec: PanelSpec, x0: number, y0: number): string {
  const curves = panelCurves(spec);
  const { panelWidth, panelHeight, marginLeft, marginRight, marginTop, marginBottom } = STYLE;
  const left = x0 + marginLeft;
  const top = y0 + marginTop;
  const innerW = panelWidth - marginLeft - marginRight;
  const innerH = panelHeight - marginTop - marginBottom;

  let lo = Infinity;
  let hi = -Infinity;
  for (const { series } of curves) {
    const mean = series.mean[spec.observable];
    const err = series.stderr[spec.observable];
    mean.forEach((m, i) => {
      lo = Math.min(lo, m - (err[i] ?? 0));
      hi = Math.max(hi, m + (err[i] ?? 0));
    });
  }
  const pad = 0.05 * (hi - lo || 1);
  const xScale = linearScale(0, 1, left, left + innerW, 5);
  const yScale = linearScale(hi + pad, lo - pad, top, top + innerH, 5);

  const parts: string[] = [];
  parts.push(
    drawAxes(x0, y0, xScale, yScale, "t / t_total",
             OBSERVABLE_LABELS[spec.observable] ?? spec.observable),
  );
  // error bands first, then lines on top; ideal drawn last
  for (const curve of curves) {
    if (curve.kind === "ideal") continue;
    const xs = normalizedTime(curve.series);
    const mean = curve.series.mean[spec.observable];
    const err = curve.series.stderr[spec.observable];
    if (err.every((e) => e === 0)) continue;
    const upper: Array<[number, number]> = mean.map((m, i) => [
      round2(xScale.map(xs[i] ?? 0)),
      round2(yScale.map(m + (err[i] ?? 0))),
    ]);
    const lower: Array<[number, number]> = mean
      .map((m, i): [number, number] => [
        round2(xScale.map(xs[i] ?? 0)),
        round2(yScale.map(m - (err[i] ?? 0))),
      ])
      .reverse();
    parts.push(
      tag("path", [
        ["d", polygonPath([...upper, ...lower])],
        ["fill", curveStyle(curve.kind).color],
        ["fill-opacity", STYLE.bandOpacity],
        ["stroke", "none"],
      ]),
    );
  }
  const order: Curve["kind"][] = ["unprotected", "protected", "ideal"];
  for (const kind of order) {
    const curve = curves.find((c) => c.kind === kind);
    if (!curve) continue;
    const xs = normalizedTime(curve.series);
    const mean = curve.series.mean[spec.observable];
    const style = curveStyle(kind);
    const pts: Array<[number, number]> = mean.map((m, i) => [
      round2(xScale.map(xs[i] ?? 0)),
      round2(yScale.map(m)),
    ]);
    const attrs: Array<[string, string | number]> = [
      ["d", polylinePath(pts)],
      ["fill", "none"],
      ["stroke", style.color],
      ["stroke-width", style.width],
    ];
    if (style.dash) attrs.push(["stroke-dasharray", style.dash]);
    parts.push(tag("path", attrs));
  }
  if (spec.label) {
    parts.push(
      tag(
        "text",
        [
          ["x", fmt(left + 6)],
          ["y", fmt(top + STYLE.fontSizeLabel + 2)],
          ["font-family", STYLE.fontFamily],
          ["font-size", STYLE.fontSizeLabel],
          ["fill", STYLE.axisColor],
        ],
        escapeXml(spec.label),
      ),
    );
  }
  return parts.join("");
}

function legend(x: number, y: number, entries: Array<[string, Curve["kind"]]>): string {
  const parts: string[] = [];
  let cx = x;
  for (const [label, kind] of entries) {
    const style = curveStyle(kind);
    const attrs: Array<[string, string | number]> = [
      ["x1", fmt(cx)],
      ["y1", fmt(y)],
      ["x2", fmt(cx + 26)],
      ["y2", fmt(y)],
      ["stroke", style.color],
      ["stroke-width", style.width],
    ];
    if (style.dash) attrs.push(["stroke-dasharray", style.dash]);
    parts.push(tag("line", attrs));
    parts.push(
      tag(
        "text",
        [
          ["x", fmt(cx + 30)],
          ["y", fmt(y + STYLE.fontSizeTick / 3)],
          ["font-family", STYLE.fontFamily],
          ["font-size", STYLE.fontSizeTick],
          ["fill", STYLE.axisColor],
        ],
        escapeXml(label),
      ),
    );
    cx += 30 + 8 * label.length + 18;
  }
  return parts.join("");
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

export function renderDynamicsFigure(spec: DynamicsFigureSpec): string {
  if (!spec.panels || spec.panels.length === 0) {
    throw new Error("figure spec has no panels");
  }
  const columns = spec.columns ?? 2;
  const rows = Math.ceil(spec.panels.length / columns);
  const headerH = 24;
  const width = columns * STYLE.panelWidth + (columns - 1) * STYLE.panelGapX;
  const height = rows * STYLE.panelHeight + (rows - 1) * STYLE.panelGapY + headerH;
  const parts: string[] = [];
  parts.push(
    legend(10, 14, [
      ["unprotected", "unprotected"],
      ["protected", "protected"],
      ["ideal model", "ideal"],
    ]),
  );
  if (spec.title) {
    parts.push(
      tag(
        "text",
        [
          ["x", fmt(width - 8)],
          ["y", 16],
          ["text-anchor", "end"],
          ["font-family", STYLE.fontFamily],
          ["font-size", STYLE.fontSizeTitle],
          ["fill", STYLE.axisColor],
        ],
        escapeXml(spec.title),
      ),
    );
  }
  spec.panels.forEach((panel, i) => {
    const col = i % columns;
    const row = Math.floor(i / columns);
    const x0 = col * (STYLE.panelWidth + STYLE.panelGapX);
    const y0 = headerH + row * (STYLE.panelHeight + STYLE.panelGapY);
    parts.push(tag("g", [["class", "panel"]], renderPanel(panel, x0, y0)));
  });
  return svgDocument(width, height, parts.join(""));
}

export function renderInfidelityFigure(
  unprotectedCsv: string,
  protectedCsv: string,
): string {
  const u = readEnsembleCsv(unprotectedCsv);
  const p = readEnsembleCsv(protectedCsv);
  const series: Array<[EnsembleSeries, "unprotected" | "protected"]> = [
    [u, "unprotected"],
    [p, "protected"],
  ];
  let lo = Infinity;
  let hi = -Infinity;
  const prepared = series.map(([s, kind]) => {
    const xs = normalizedTime(s);
    const pts: Array<[number, number]> = [];
    s.mean.fidelity.forEach((f, i) => {
      const infid = 1 - f;
      if (infid > 0) {
        pts.push([xs[i] ?? 0, infid]);
        lo = Math.min(lo, infid);
        hi = Math.max(hi, infid);
      }
    });
    if (pts.length === 0) {
      throw new Error(`${s.path}: no positive infidelity points to draw`);
    }
    return { pts, kind };
  });

  const width = 1.6 * STYLE.panelWidth;
  const height = 1.6 * STYLE.panelHeight;
  const left = STYLE.marginLeft;
  const top = STYLE.marginTop;
  const innerW = width - STYLE.marginLeft - STYLE.marginRight;
  const innerH = height - STYLE.marginTop - STYLE.marginBottom;
  const xScale = linearScale(0, 1, left, left + innerW, 5);
  const yScale = logScale(lo / 1.5, hi * 1.5, top + innerH, top);

  const parts: string[] = [];
  parts.push(drawAxes(0, 0, xScale, yScale, "t / t_total", "1 - F", true));
  for (const { pts, kind } of prepared) {
    const style = curveStyle(kind);
    const mapped: Array<[number, number]> = pts.map(([x, y]) => [
      round2(xScale.map(x)),
      round2(yScale.map(y)),
    ]);
    const attrs: Array<[string, string | number]> = [
      ["d", polylinePath(mapped)],
      ["fill", "none"],
      ["stroke", style.color],
      ["stroke-width", style.width],
    ];
    if (style.dash) attrs.push(["stroke-dasharray", style.dash]);
    parts.push(tag("path", attrs));
  }
  parts.push(
    legend(left + 8, top + 10, [
      ["unprotected", "unprotected"],
      ["protected", "protected"],
    ]),
  );
  return svgDocument(width, height, parts.join(""));
}

function svgDocument(width: number, height: number, content: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${fmt(width)}" ` +
    `height="${fmt(height)}" viewBox="0 0 ${fmt(width)} ${fmt(height)}">` +
    `<rect x="0" y="0" width="${fmt(width)}" height="${fmt(height)}" ` +
    `fill="#ffffff"/>` +
    content +
    `</svg>\n`
  );
}
