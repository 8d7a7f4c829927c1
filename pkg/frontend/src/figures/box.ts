/** Box-and-whisker figure: one box per group column value (e.g. summary
 *  attack success grouped by heterogeneity index). */
import { requireColumns, SchemaError, type Table } from "../csv.js";
import { boxStats, groupBy, orderedKeys } from "../stats.js";
import {
  axes, DEFAULT_FRAME, el, fmt, linearScale, padDomain, plotArea, round2,
  svgDoc, text, type Frame,
} from "../svg.js";

export interface BoxOptions {
  group: string;
  value: string;
  frame?: Frame;
}

function numeric(raw: string, col: string, key: string): number {
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`column "${col}" in group "${key}": "${raw}" is not a number`);
  }
  return v;
}

export function renderBox(table: Table, opts: BoxOptions): string {
  requireColumns(table, [opts.group, opts.value]);
  const frame = opts.frame ?? DEFAULT_FRAME;
  const groups = groupBy(table.rows, opts.group);
  const keys = orderedKeys(groups);
  const stats = keys.map((key) =>
    boxStats(groups.get(key)!.map((r) => numeric(r[opts.value], opts.value, key))),
  );

  const { x0, x1, y0, y1 } = plotArea(frame);
  const lo = Math.min(...stats.map((s) => s.min));
  const hi = Math.max(...stats.map((s) => s.max));
  const yScale = linearScale(padDomain([lo, hi]), [y0, y1]);
  const band = (x1 - x0) / keys.length;
  const boxWidth = band * 0.5;

  const body = axes(frame, yScale, opts.group, opts.value);
  keys.forEach((key, i) => {
    const s = stats[i];
    const cx = round2(x0 + band * (i + 0.5));
    const [yMin, yQ1, yMed, yQ3, yMax] =
      [s.min, s.q1, s.median, s.q3, s.max].map((v) => round2(yScale(v)));
    const left = round2(cx - boxWidth / 2);
    const capL = round2(cx - boxWidth / 4);
    const capR = round2(cx + boxWidth / 4);
    body.push(el("g", {
      class: "box", "data-group": key, "data-n": s.n,
      "data-q1": s.q1, "data-median": s.median, "data-q3": s.q3,
    }, [
      el("line", { x1: cx, y1: yMin, x2: cx, y2: yQ1, stroke: "#333" }),
      el("line", { x1: cx, y1: yQ3, x2: cx, y2: yMax, stroke: "#333" }),
      el("line", { x1: capL, y1: yMin, x2: capR, y2: yMin, stroke: "#333" }),
      el("line", { x1: capL, y1: yMax, x2: capR, y2: yMax, stroke: "#333" }),
      el("rect", {
        x: left, y: yQ3, width: round2(boxWidth), height: round2(yQ1 - yQ3),
        fill: "#9ecae1", stroke: "#333",
      }),
      el("line", {
        x1: left, y1: yMed, x2: round2(left + boxWidth), y2: yMed,
        stroke: "#08306b", "stroke-width": 2,
      }),
    ]));
    body.push(text(cx, y0 + 16, key, { "text-anchor": "middle", "font-size": 11 }));
  });
  return svgDoc(frame, body);
}
