import { describe, expect, it } from "vitest";

import { numericColumn, parseCsv, requireColumns, SchemaError } from "../src/csv.js";

describe("parseCsv", () => {
  it("reads header and rows", () => {
    const t = parseCsv("a,b\n1,x\n2,y\n");
    expect(t.columns).toEqual(["a", "b"]);
    expect(t.rows).toEqual([{ a: "1", b: "x" }, { a: "2", b: "y" }]);
  });

  it("keeps full float precision as strings", () => {
    const t = parseCsv("v\n-0.012918647630217814\n");
    expect(t.rows[0].v).toBe("-0.012918647630217814");
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(SchemaError);
  });
});

describe("requireColumns", () => {
  it("names the missing column", () => {
    const t = parseCsv("a,b\n1,2\n");
    expect(() => requireColumns(t, ["a", "hi"])).toThrow(/column "hi"/);
  });

  it("accepts present columns", () => {
    const t = parseCsv("a,b\n1,2\n");
    expect(() => requireColumns(t, ["b", "a"])).not.toThrow();
  });
});

describe("numericColumn", () => {
  it("parses floats in row order", () => {
    const t = parseCsv("x\n0.5\n-2\n1e-3\n");
    expect(numericColumn(t, "x")).toEqual([0.5, -2, 0.001]);
  });

  it("points at the bad cell", () => {
    const t = parseCsv("x\n0.5\noops\n");
    expect(() => numericColumn(t, "x")).toThrow(/row 1.*not a number/);
  });
});
