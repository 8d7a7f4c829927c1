/** CSV tables as produced by the experiment harness: a header row, comma
 *  separators, floats printed in full precision, no quoting. */
import { readFileSync } from "node:fs";
import Papa from "papaparse";

export type Row = Record<string, string>;

export interface Table {
  columns: string[];
  rows: Row[];
}

/** A referenced column is absent or a cell cannot be read as required. */
export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
  const parsed = Papa.parse<Row>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const hard = parsed.errors.filter((e) => e.code !== "UndetectableDelimiter");
  if (hard.length > 0) {
    throw new SchemaError(`malformed CSV: ${hard[0].message} (row ${hard[0].row})`);
  }
  const columns = parsed.meta.fields ?? [];
  if (columns.length === 0) {
    throw new SchemaError("malformed CSV: no header row");
  }
  return { columns, rows: parsed.data };
}

export function readTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Throw a SchemaError naming the first missing column, if any. */
export function requireColumns(table: Table, needed: string[]): void {
  for (const col of needed) {
    if (!table.columns.includes(col)) {
      throw new SchemaError(
        `column "${col}" not in CSV (have: ${table.columns.join(", ")})`,
      );
    }
  }
}

/** One column as finite numbers, in row order. */
export function numericColumn(table: Table, col: string): number[] {
  requireColumns(table, [col]);
  return table.rows.map((row, i) => {
    const v = Number(row[col]);
    if (!Number.isFinite(v)) {
      throw new SchemaError(`column "${col}" row ${i}: "${row[col]}" is not a number`);
    }
    return v;
  });
}
