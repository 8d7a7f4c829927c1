export { parseCsv, readTable, requireColumns, numericColumn, SchemaError } from "./csv.js";
export type { Table, Row } from "./csv.js";
export { boxStats, groupBy, mean, orderedKeys, quantileSorted } from "./stats.js";
export type { BoxStats } from "./stats.js";
export { DEFAULT_FRAME, linearScale, padDomain, plotArea } from "./svg.js";
export type { Frame, Scale } from "./svg.js";
export { renderBox } from "./figures/box.js";
export { renderBar } from "./figures/bar.js";
export { renderHeatmap } from "./figures/heatmap.js";
export { renderScatter } from "./figures/scatter.js";
export { main, render, KINDS } from "./cli.js";
export type { Kind } from "./cli.js";
