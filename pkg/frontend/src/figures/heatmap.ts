/** Heat-map figure: mean of a value column over the grid of two config
 *  axes (e.g. attack scale x total budget). */
import { requireColumns, SchemaError, type Table } from "../csv.js";
import { groupBy, mean, orderedKeys } from "../stats.js";
import { DEFAULT_FRAME, el, fmt, plotArea, round2, svgDoc, text, type Frame } from "../svg.js";

export interface HeatmapOptions {
  x: string;
  y: string;
  value: string;
  frame?: Frame;
}

function lerpColor(t: number): string {
  // white -> deep blue
  const from = [247, 251, 255];
  const to = [8, 81, 156];
  const c = from.map((f, i) => Math.round(f + (to[i] - f) * t));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export function renderHeatmap(table: Table, opts: HeatmapOptions): string {
  requireColumns(table, [opts.x, opts.y, opts.value]);
  const frame = opts.frame ?? DEFAULT_FRAME;
  const xKeys = orderedKeys(groupBy(table.rows, opts.x));
  const yKeys = orderedKeys(groupBy(table.rows, opts.y));

  const cells = new Map<string, number>();
  for (const [xi, xk] of xKeys.entries()) {
    for (const [yi, yk] of yKeys.entries()) {
      const vals = table.rows
        .filter((r) => r[opts.x] === xk && r[opts.y] === yk)
        .map((r) => Number(r[opts.value]));
      if (vals.length === 0) continue; // sparse sweep: leave the cell empty
      if (vals.some((v) => !Number.isFinite(v))) {
        throw new SchemaError(`column "${opts.value}" at (${xk}, ${yk}) is not numeric`);
      }
      cells.set(`${xi},${yi}`, mean(vals));
    }
  }
  const means = [...cells.values()];
  const lo = Math.min(...means);
  const hi = Math.max(...means);
  const span = hi - lo || 1;

  const { x0, x1, y0, y1 } = plotArea(frame);
  const cw = (x1 - x0) / xKeys.length;
  const ch = (y0 - y1) / yKeys.length;

  const body: string[] = [];
  for (const [xi, xk] of xKeys.entries()) {
    for (const [yi, yk] of yKeys.entries()) {
      const m = cells.get(`${xi},${yi}`);
      if (m === undefined) continue;
      const t = (m - lo) / span;
      const cx = x0 + cw * xi;
      // row 0 at the bottom so both axes read low-to-high
      const cy = y0 - ch * (yi + 1);
      body.push(el("rect", {
        class: "cell",
        "data-x": xk,
        "data-y": yk,
        "data-value": m,
        x: round2(cx), y: round2(cy), width: round2(cw), height: round2(ch),
        fill: lerpColor(t), stroke: "#fff",
      }));
      body.push(text(cx + cw / 2, cy + ch / 2 + 4, fmt(m), {
        "text-anchor": "middle",
        "font-size": 11,
        fill: t > 0.6 ? "#fff" : "#111",
      }));
    }
  }
  for (const [xi, xk] of xKeys.entries()) {
    body.push(text(x0 + cw * (xi + 0.5), y0 + 16, xk, { "text-anchor": "middle", "font-size": 11 }));
  }
  for (const [yi, yk] of yKeys.entries()) {
    body.push(text(x0 - 7, y0 - ch * (yi + 0.5) + 4, yk, { "text-anchor": "end", "font-size": 11 }));
  }
  body.push(text((x0 + x1) / 2, frame.height - 8, opts.x, { "text-anchor": "middle", "font-size": 12 }));
  body.push(el("g", { transform: `translate(14 ${(y0 + y1) / 2}) rotate(-90)` },
    text(0, 0, opts.y, { "text-anchor": "middle", "font-size": 12 })));
  return svgDoc(frame, body);
}
