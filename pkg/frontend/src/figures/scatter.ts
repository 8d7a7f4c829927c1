/** Scatter figure with an optional regression overlay. The fitted line is
 *  never recomputed here: when the CSV carries slope/intercept columns
 *  (the harness writes them for distance sweeps) the overlay passes those
 *  values through verbatim. */
import { numericColumn, SchemaError, type Table } from "../csv.js";
import {
  axes, DEFAULT_FRAME, el, linearScale, padDomain, plotArea, round2, svgDoc,
  type Frame,
} from "../svg.js";

export interface ScatterOptions {
  x: string;
  y: string;
  frame?: Frame;
}

export function renderScatter(table: Table, opts: ScatterOptions): string {
  const xs = numericColumn(table, opts.x);
  const ys = numericColumn(table, opts.y);
  if (xs.length === 0) throw new SchemaError("scatter needs at least one row");
  const frame = opts.frame ?? DEFAULT_FRAME;

  const hasFit = table.columns.includes("slope") && table.columns.includes("intercept");
  const slope = hasFit ? Number(table.rows[0].slope) : 0;
  const intercept = hasFit ? Number(table.rows[0].intercept) : 0;

  const xDomain = padDomain([Math.min(...xs), Math.max(...xs)]);
  const yAll = [...ys];
  if (hasFit) {
    yAll.push(slope * xDomain[0] + intercept, slope * xDomain[1] + intercept);
  }
  const yDomain = padDomain([Math.min(...yAll), Math.max(...yAll)]);

  const { x0, x1, y0, y1 } = plotArea(frame);
  const xScale = linearScale(xDomain, [x0, x1]);
  const yScale = linearScale(yDomain, [y0, y1]);

  const body = axes(frame, yScale, opts.x, opts.y);
  for (const t of xScale.ticks(6)) {
    const px = round2(xScale(t));
    body.push(el("line", { x1: px, y1: y0, x2: px, y2: y0 + 4, stroke: "#333" }));
    body.push(el("text", {
      x: px, y: y0 + 16, "text-anchor": "middle", "font-size": 11,
    }, String(Number(t.toPrecision(3)))));
  }
  xs.forEach((x, i) => {
    body.push(el("circle", {
      class: "point", cx: round2(xScale(x)), cy: round2(yScale(ys[i])), r: 3.5,
      fill: "#2171b5", "fill-opacity": 0.65, stroke: "none",
    }));
  });
  if (hasFit) {
    // full-precision endpoints: the line is the fit, not a sketch of it
    body.push(el("line", {
      class: "regression",
      "data-slope": table.rows[0].slope,
      "data-intercept": table.rows[0].intercept,
      x1: xScale(xDomain[0]),
      y1: yScale(slope * xDomain[0] + intercept),
      x2: xScale(xDomain[1]),
      y2: yScale(slope * xDomain[1] + intercept),
      stroke: "#cb181d", "stroke-width": 2,
    }));
  }
  return svgDoc(frame, body);
}
