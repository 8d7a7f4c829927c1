/** hetplot — render experiment CSVs to SVG figures.
 *
 *  Usage:
 *    hetplot box     --in summary_long.csv --out fig.svg --group hi
 *    hetplot bar     --in summary_long.csv --out fig.svg --group timing
 *    hetplot heatmap --in summary_long.csv --out fig.svg [--x attack_scale --y total_budget]
 *    hetplot scatter --in scatter.csv      --out fig.svg [--x chisq_target --y summary_asr]
 *
 *  --value picks the measured column (default summary_asr); --width/--height
 *  size the canvas. Exit status: 0 on success, 2 on usage/schema errors.
 */
import { realpathSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { readTable, SchemaError } from "./csv.js";
import { renderBar } from "./figures/bar.js";
import { renderBox } from "./figures/box.js";
import { renderHeatmap } from "./figures/heatmap.js";
import { renderScatter } from "./figures/scatter.js";
import { DEFAULT_FRAME, type Frame } from "./svg.js";

export const KINDS = ["box", "bar", "heatmap", "scatter"] as const;
export type Kind = (typeof KINDS)[number];

class UsageError extends Error {}

function frameFrom(width?: string, height?: string): Frame {
  const f = { ...DEFAULT_FRAME, margin: { ...DEFAULT_FRAME.margin } };
  if (width !== undefined) f.width = positiveInt(width, "--width");
  if (height !== undefined) f.height = positiveInt(height, "--height");
  return f;
}

function positiveInt(raw: string, flag: string): number {
  const v = Number(raw);
  if (!Number.isInteger(v) || v <= 0) {
    throw new UsageError(`${flag} must be a positive integer, got "${raw}"`);
  }
  return v;
}

function need(value: string | undefined, flag: string): string {
  if (value === undefined) throw new UsageError(`missing required ${flag}`);
  return value;
}

export function render(kind: Kind, inPath: string, opts: {
  group?: string; value?: string; x?: string; y?: string; frame?: Frame;
}): string {
  const table = readTable(inPath);
  const value = opts.value ?? "summary_asr";
  switch (kind) {
    case "box":
      return renderBox(table, { group: need(opts.group, "--group"), value, frame: opts.frame });
    case "bar":
      return renderBar(table, { group: need(opts.group, "--group"), value, frame: opts.frame });
    case "heatmap":
      return renderHeatmap(table, {
        x: opts.x ?? "attack_scale", y: opts.y ?? "total_budget", value, frame: opts.frame,
      });
    case "scatter":
      return renderScatter(table, {
        x: opts.x ?? "chisq_target", y: opts.y ?? "summary_asr", frame: opts.frame,
      });
  }
}

export function main(argv: string[]): number {
  try {
    const { values, positionals } = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        group: { type: "string" },
        value: { type: "string" },
        x: { type: "string" },
        y: { type: "string" },
        width: { type: "string" },
        height: { type: "string" },
      },
    });
    const kind = positionals[0] as Kind | undefined;
    if (positionals.length !== 1 || !kind || !KINDS.includes(kind)) {
      throw new UsageError(`expected one figure kind out of: ${KINDS.join(", ")}`);
    }
    const svg = render(kind, need(values.in, "--in"), {
      group: values.group,
      value: values.value,
      x: values.x,
      y: values.y,
      frame: frameFrom(values.width, values.height),
    });
    const out = need(values.out, "--out");
    writeFileSync(out, svg);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof UsageError || err instanceof SchemaError ||
        (err as NodeJS.ErrnoException).code === "ENOENT" ||
        (err as NodeJS.ErrnoException).code === "ERR_PARSE_ARGS_UNKNOWN_OPTION") {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

const invokedPath = process.argv[1];
if (invokedPath && pathToFileURL(realpathSync(invokedPath)).href === import.meta.url) {
  process.exit(main(process.argv.slice(2)));
}
