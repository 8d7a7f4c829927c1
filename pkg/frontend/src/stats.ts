/** Presentation-side summaries: grouping and box-plot quartiles. Fitted
 *  statistics (regression lines) are never computed here — figures take
 *  them from the harness CSV so the two can never disagree. */
import type { Row } from "./csv.js";

export function mean(values: number[]): number {
  if (values.length === 0) throw new Error("mean of empty list");
  return values.reduce((a, b) => a + b, 0) / values.length;
}

/** Linear-interpolation quantile over an already sorted array. */
export function quantileSorted(sorted: number[], p: number): number {
  if (sorted.length === 0) throw new Error("quantile of empty list");
  if (p < 0 || p > 1) throw new Error(`quantile fraction ${p} outside [0, 1]`);
  const pos = (sorted.length - 1) * p;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

export interface BoxStats {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  n: number;
}

export function boxStats(values: number[]): BoxStats {
  const sorted = [...values].sort((a, b) => a - b);
  return {
    min: sorted[0],
    q1: quantileSorted(sorted, 0.25),
    median: quantileSorted(sorted, 0.5),
    q3: quantileSorted(sorted, 0.75),
    max: sorted[sorted.length - 1],
    n: sorted.length,
  };
}

/** Group rows by a column's raw string value, preserving first-appearance
 *  order of the keys. */
export function groupBy(rows: Row[], col: string): Map<string, Row[]> {
  const groups = new Map<string, Row[]>();
  for (const row of rows) {
    const key = row[col];
    const bucket = groups.get(key);
    if (bucket) bucket.push(row);
    else groups.set(key, [row]);
  }
  return groups;
}

/** Group keys in display order: ascending numerically when every key parses
 *  as a number (axis values), first-appearance order otherwise (categories
 *  such as timing names keep sweep order). */
export function orderedKeys(groups: Map<string, Row[]>): string[] {
  const keys = [...groups.keys()];
  if (keys.every((k) => Number.isFinite(Number(k)))) {
    return keys.sort((a, b) => Number(a) - Number(b));
  }
  return keys;
}
