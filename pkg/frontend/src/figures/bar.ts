/** Bar figure: group means side by side (e.g. summary attack success per
 *  poison-timing strategy or per malicious histogram). */
import { requireColumns, SchemaError, type Table } from "../csv.js";
import { groupBy, mean, orderedKeys } from "../stats.js";
import {
  axes, DEFAULT_FRAME, el, fmt, linearScale, plotArea, round2, svgDoc, text,
  type Frame,
} from "../svg.js";

export interface BarOptions {
  group: string;
  value: string;
  frame?: Frame;
}

export function renderBar(table: Table, opts: BarOptions): string {
  requireColumns(table, [opts.group, opts.value]);
  const frame = opts.frame ?? DEFAULT_FRAME;
  const groups = groupBy(table.rows, opts.group);
  const keys = orderedKeys(groups);
  const means = keys.map((key) => {
    const vals = groups.get(key)!.map((r) => Number(r[opts.value]));
    if (vals.some((v) => !Number.isFinite(v))) {
      throw new SchemaError(`column "${opts.value}" in group "${key}" is not numeric`);
    }
    return mean(vals);
  });

  const { x0, x1, y0, y1 } = plotArea(frame);
  const top = Math.max(...means, 0);
  const bottom = Math.min(...means, 0);
  const yScale = linearScale([bottom, top * 1.08 || 1], [y0, y1]);
  const band = (x1 - x0) / keys.length;
  const barWidth = band * 0.6;
  const yZero = round2(yScale(0));

  const body = axes(frame, yScale, opts.group, `mean ${opts.value}`);
  keys.forEach((key, i) => {
    const cx = x0 + band * (i + 0.5);
    const yTop = round2(yScale(means[i]));
    body.push(el("rect", {
      class: "bar",
      "data-group": key,
      "data-mean": means[i],
      x: round2(cx - barWidth / 2),
      y: Math.min(yTop, yZero),
      width: round2(barWidth),
      height: Math.abs(yZero - yTop) || 0.5,
      fill: "#4292c6",
      stroke: "#333",
    }));
    body.push(text(cx, yTop - 5, fmt(means[i]), { "text-anchor": "middle", "font-size": 10 }));
    body.push(text(cx, y0 + 16, key, { "text-anchor": "middle", "font-size": 11 }));
  });
  return svgDoc(frame, body);
}
