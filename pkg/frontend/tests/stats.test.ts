import { describe, expect, it } from "vitest";

import { boxStats, groupBy, mean, orderedKeys, quantileSorted } from "../src/stats.js";

describe("quantileSorted", () => {
  it("interpolates linearly (matches numpy default)", () => {
    const v = [1, 2, 3, 4];
    expect(quantileSorted(v, 0.25)).toBeCloseTo(1.75, 12);
    expect(quantileSorted(v, 0.5)).toBeCloseTo(2.5, 12);
    expect(quantileSorted(v, 0.75)).toBeCloseTo(3.25, 12);
  });

  it("handles endpoints and singletons", () => {
    expect(quantileSorted([5], 0.5)).toBe(5);
    expect(quantileSorted([1, 9], 0)).toBe(1);
    expect(quantileSorted([1, 9], 1)).toBe(9);
  });
});

describe("boxStats", () => {
  it("computes the five-number summary", () => {
    const b = boxStats([4, 1, 3, 2]);
    expect(b).toEqual({ min: 1, q1: 1.75, median: 2.5, q3: 3.25, max: 4, n: 4 });
  });
});

describe("mean", () => {
  it("averages", () => {
    expect(mean([1, 2, 6])).toBeCloseTo(3, 12);
  });
});

describe("groupBy", () => {
  it("preserves first-appearance order", () => {
    const rows = [{ g: "b" }, { g: "a" }, { g: "b" }];
    const m = groupBy(rows, "g");
    expect([...m.keys()]).toEqual(["b", "a"]);
    expect(m.get("b")).toHaveLength(2);
  });
});

describe("orderedKeys", () => {
  it("sorts numerically when every key is numeric", () => {
    const m = groupBy([{ g: "10" }, { g: "2" }, { g: "0.5" }], "g");
    expect(orderedKeys(m)).toEqual(["0.5", "2", "10"]);
  });

  it("keeps insertion order for categorical keys", () => {
    const m = groupBy([{ g: "evenly" }, { g: "last" }, { g: "first_k" }], "g");
    expect(orderedKeys(m)).toEqual(["evenly", "last", "first_k"]);
  });
});
