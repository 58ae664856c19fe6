/** Command line: render figures from simulator CSV outputs.
 *
 *   node dist/main.js dynamics --spec figure.json
 *   node dist/main.js infidelity --unprotected u.csv --protected p.csv \
 *        --out fig.svg
 */

import { writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { mkdirSync } from "node:fs";

import { renderDynamicsFigure, renderInfidelityFigure } from "./figure.js";
import { loadFigureSpec } from "./spec.js";

function getFlag(args: string[], name: string): string | undefined {
  const idx = args.indexOf(name);
  if (idx === -1) return undefined;
  const value = args[idx + 1];
  if (value === undefined) {
    throw new Error(`missing value for ${name}`);
  }
  return value;
}

function writeOutput(path: string, svg: string): void {
  mkdirSync(dirname(path) || ".", { recursive: true });
  writeFileSync(path, svg, "utf8");
  console.log(`wrote ${path}`);
}

export function run(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "dynamics") {
      const specPath = getFlag(rest, "--spec");
      if (!specPath) {
        console.error("dynamics: --spec FILE is required");
        return 2;
      }
      const spec = loadFigureSpec(specPath);
      writeOutput(spec.output, renderDynamicsFigure(spec));
      return 0;
    }
    if (command === "infidelity") {
      const u = getFlag(rest, "--unprotected");
      const p = getFlag(rest, "--protected");
      const out = getFlag(rest, "--out");
      if (!u || !p || !out) {
        console.error(
          "infidelity: --unprotected, --protected and --out are required",
        );
        return 2;
      }
      writeOutput(out, renderInfidelityFigure(u, p));
      return 0;
    }
    console.error("usage: main.js <dynamics|infidelity> [flags]");
    return 2;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
