import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { readTable } from "../src/csv.js";
import { renderBar } from "../src/figures/bar.js";
import { renderBox } from "../src/figures/box.js";
import { renderHeatmap } from "../src/figures/heatmap.js";
import { renderScatter } from "../src/figures/scatter.js";
import { boxStats, groupBy, mean, orderedKeys } from "../src/stats.js";
import { DEFAULT_FRAME, linearScale, padDomain, plotArea } from "../src/svg.js";
import { tagsWithClass } from "./svgq.js";

const fix = (name: string) =>
  fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));

const HI = fix("hi_summary_long.csv");
const GRID = fix("scale_budget_summary_long.csv");
const SCATTER = fix("chisq_scatter.csv");
const TIMING = fix("timing_summary_long.csv");

describe("box figure", () => {
  const svg = renderBox(readTable(HI), { group: "hi", value: "summary_asr" });

  it("draws one box per heterogeneity level", () => {
    const boxes = tagsWithClass(svg, "g", "box");
    expect(boxes).toHaveLength(5);
    expect(boxes.map((b) => b.attrs["data-group"])).toEqual([
      "0.0",
      "0.25",
      "0.5",
      "0.75",
      "1.0",
    ]);
    for (const b of boxes) expect(b.attrs["data-n"]).toBe("5");
  });

  it("stamps the five-number summary per group", () => {
    const table = readTable(HI);
    const groups = groupBy(table.rows, "hi");
    for (const b of tagsWithClass(svg, "g", "box")) {
      const vals = groups
        .get(b.attrs["data-group"])!
        .map((r) => Number(r.summary_asr));
      const stats = boxStats(vals);
      expect(Number(b.attrs["data-median"])).toBeCloseTo(stats.median, 10);
      expect(Number(b.attrs["data-q1"])).toBeCloseTo(stats.q1, 10);
      expect(Number(b.attrs["data-q3"])).toBeCloseTo(stats.q3, 10);
    }
  });

  it("is a complete svg document", () => {
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    expect(svg).toContain('xmlns="http://www.w3.org/2000/svg"');
  });

  it("rejects a missing group column by name", () => {
    expect(() =>
      renderBox(readTable(HI), { group: "nope", value: "summary_asr" }),
    ).toThrow(/column "nope"/);
  });
});

describe("bar figure", () => {
  it("draws one bar per timing arm in sweep order", () => {
    const svg = renderBar(readTable(TIMING), {
      group: "timing",
      value: "summary_asr",
    });
    const bars = tagsWithClass(svg, "rect", "bar");
    expect(bars.map((b) => b.attrs["data-group"])).toEqual([
      "evenly",
      "first_k",
      "middle_k",
      "last_k",
      "last",
    ]);
  });

  it("stamps group means", () => {
    const table = readTable(TIMING);
    const svg = renderBar(table, { group: "timing", value: "summary_asr" });
    const groups = groupBy(table.rows, "timing");
    for (const b of tagsWithClass(svg, "rect", "bar")) {
      const vals = groups
        .get(b.attrs["data-group"])!
        .map((r) => Number(r.summary_asr));
      expect(Number(b.attrs["data-mean"])).toBeCloseTo(mean(vals), 10);
    }
  });

  it("orders numeric groups numerically", () => {
    const svg = renderBar(readTable(HI), { group: "hi", value: "summary_asr" });
    const bars = tagsWithClass(svg, "rect", "bar");
    expect(bars.map((b) => b.attrs["data-group"])).toEqual([
      "0.0",
      "0.25",
      "0.5",
      "0.75",
      "1.0",
    ]);
  });
});

describe("heatmap figure", () => {
  const table = readTable(GRID);
  const svg = renderHeatmap(table, {
    x: "attack_scale",
    y: "total_budget",
    value: "summary_asr",
  });

  it("draws a full 3x3 grid of cells", () => {
    const cells = tagsWithClass(svg, "rect", "cell");
    expect(cells).toHaveLength(9);
    const coords = new Set(
      cells.map((c) => `${c.attrs["data-x"]},${c.attrs["data-y"]}`),
    );
    expect(coords.size).toBe(9);
    for (const s of ["2", "5", "10"]) {
      for (const b of ["50", "100", "150"]) {
        expect(coords.has(`${s},${b}`)).toBe(true);
      }
    }
  });

  it("stamps the mean of each cell", () => {
    const byCell = new Map<string, number[]>();
    for (const r of table.rows) {
      const k = `${r.attack_scale},${r.total_budget}`;
      (byCell.get(k) ?? byCell.set(k, []).get(k)!).push(Number(r.summary_asr));
    }
    for (const c of tagsWithClass(svg, "rect", "cell")) {
      const k = `${c.attrs["data-x"]},${c.attrs["data-y"]}`;
      expect(Number(c.attrs["data-value"])).toBeCloseTo(mean(byCell.get(k)!), 10);
    }
  });
});

describe("scatter figure", () => {
  const table = readTable(SCATTER);
  const svg = renderScatter(table, { x: "chisq_target", y: "summary_asr" });

  it("draws one point per run", () => {
    expect(tagsWithClass(svg, "circle", "point")).toHaveLength(30);
  });

  it("passes the fitted line through untouched", () => {
    const lines = tagsWithClass(svg, "line", "regression");
    expect(lines).toHaveLength(1);
    const attrs = lines[0].attrs;
    // Raw strings from the CSV: the plot layer never recomputes the fit.
    expect(attrs["data-slope"]).toBe(table.rows[0].slope);
    expect(attrs["data-intercept"]).toBe(table.rows[0].intercept);
    expect(Number(attrs["data-slope"])).toBeCloseTo(
      -0.012918647630217814,
      6,
    );
    expect(Number(attrs["data-intercept"])).toBeCloseTo(
      0.5002763176898299,
      6,
    );
  });

  it("places the line endpoints exactly where the fit predicts", () => {
    const xs = table.rows.map((r) => Number(r.chisq_target));
    const ys = table.rows.map((r) => Number(r.summary_asr));
    const slope = Number(table.rows[0].slope);
    const intercept = Number(table.rows[0].intercept);

    const xDomain = padDomain([Math.min(...xs), Math.max(...xs)]);
    const fitYs = [slope * xDomain[0] + intercept, slope * xDomain[1] + intercept];
    const yDomain = padDomain([
      Math.min(...ys, ...fitYs),
      Math.max(...ys, ...fitYs),
    ]);
    const area = plotArea(DEFAULT_FRAME);
    const xScale = linearScale(xDomain, [area.x0, area.x1]);
    const yScale = linearScale(yDomain, [area.y0, area.y1]);

    const attrs = tagsWithClass(svg, "line", "regression")[0].attrs;
    expect(Number(attrs.x1)).toBeCloseTo(xScale(xDomain[0]), 6);
    expect(Number(attrs.y1)).toBeCloseTo(yScale(fitYs[0]), 6);
    expect(Number(attrs.x2)).toBeCloseTo(xScale(xDomain[1]), 6);
    expect(Number(attrs.y2)).toBeCloseTo(yScale(fitYs[1]), 6);
  });

  it("recovers the slope from the drawn geometry", () => {
    const attrs = tagsWithClass(svg, "line", "regression")[0].attrs;
    const xs = table.rows.map((r) => Number(r.chisq_target));
    const ys = table.rows.map((r) => Number(r.summary_asr));
    const slope = Number(table.rows[0].slope);
    const intercept = Number(table.rows[0].intercept);
    const xDomain = padDomain([Math.min(...xs), Math.max(...xs)]);
    const fitYs = [slope * xDomain[0] + intercept, slope * xDomain[1] + intercept];
    const yDomain = padDomain([
      Math.min(...ys, ...fitYs),
      Math.max(...ys, ...fitYs),
    ]);
    const area = plotArea(DEFAULT_FRAME);

    const invert = (px: number, d: [number, number], r: [number, number]) =>
      d[0] + ((px - r[0]) / (r[1] - r[0])) * (d[1] - d[0]);
    const x1 = invert(Number(attrs.x1), xDomain, [area.x0, area.x1]);
    const x2 = invert(Number(attrs.x2), xDomain, [area.x0, area.x1]);
    const y1 = invert(Number(attrs.y1), yDomain, [area.y0, area.y1]);
    const y2 = invert(Number(attrs.y2), yDomain, [area.y0, area.y1]);
    expect((y2 - y1) / (x2 - x1)).toBeCloseTo(slope, 6);
  });

  it("omits the line when the table carries no fit", () => {
    const bare = readTable(HI);
    const svg2 = renderScatter(bare, { x: "hi", y: "summary_asr" });
    expect(tagsWithClass(svg2, "line", "regression")).toHaveLength(0);
    expect(tagsWithClass(svg2, "circle", "point")).toHaveLength(25);
  });
});
