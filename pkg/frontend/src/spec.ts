/** Loading and validation of declarative figure descriptions. */

import { readFileSync } from "node:fs";

import { OBSERVABLES, Observable } from "./csv.js";
import { DynamicsFigureSpec, PanelSpec } from "./figure.js";

export class SpecError extends Error {}

function asObservable(value: unknown, where: string): Observable {
  if (typeof value !== "string" || !OBSERVABLES.includes(value as Observable)) {
    throw new SpecError(
      `${where}: 'observable' must be one of ${OBSERVABLES.join(", ")}, ` +
        `got ${JSON.stringify(value)}`,
    );
  }
  return value as Observable;
}

function optionalPath(value: unknown, where: string, key: string): string | undefined {
  if (value === undefined || value === null) return undefined;
  if (typeof value !== "string" || value.length === 0) {
    throw new SpecError(`${where}: '${key}' must be a nonempty path string`);
  }
  return value;
}

export function parseFigureSpec(raw: unknown, source: string): DynamicsFigureSpec {
  if (typeof raw !== "object" || raw === null) {
    throw new SpecError(`${source}: figure spec must be a JSON object`);
  }
  const data = raw as Record<string, unknown>;
  if (!Array.isArray(data.panels) || data.panels.length === 0) {
    throw new SpecError(`${source}: 'panels' must be a nonempty array`);
  }
  const panels: PanelSpec[] = data.panels.map((entry, i) => {
    const where = `${source}: panels[${i}]`;
    if (typeof entry !== "object" || entry === null) {
      throw new SpecError(`${where}: must be an object`);
    }
    const panel = entry as Record<string, unknown>;
    const parsed: PanelSpec = {
      observable: asObservable(panel.observable, where),
      unprotected: optionalPath(panel.unprotected, where, "unprotected"),
      protected: optionalPath(panel.protected, where, "protected"),
      ideal: optionalPath(panel.ideal, where, "ideal"),
      label: panel.label === undefined ? undefined : String(panel.label),
    };
    if (!parsed.unprotected && !parsed.protected && !parsed.ideal) {
      throw new SpecError(`${where}: needs at least one input CSV`);
    }
    return parsed;
  });
  if (typeof data.output !== "string" || data.output.length === 0) {
    throw new SpecError(`${source}: 'output' must be a nonempty path string`);
  }
  const columns = data.columns === undefined ? undefined : Number(data.columns);
  if (columns !== undefined && (!Number.isInteger(columns) || columns < 1)) {
    throw new SpecError(`${source}: 'columns' must be a positive integer`);
  }
  return {
    panels,
    columns,
    output: data.output,
    title: data.title === undefined ? undefined : String(data.title),
  };
}

export function loadFigureSpec(path: string): DynamicsFigureSpec {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SpecError(`cannot read figure spec '${path}': ${String(err)}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new SpecError(`figure spec '${path}' is not valid JSON: ${String(err)}`);
  }
  return parseFigureSpec(raw, path);
}
