import { readFileSync } from "fs";
import Papa from "papaparse";

export class SchemaError extends Error {
  constructor(public readonly missing: string[], path: string) {
    super(`${path}: missing required columns: ${missing.join(", ")}`);
    this.name = "SchemaError";
  }
}

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

/** Load a CSV and check the required columns exist (rows may be empty). */
export function loadTable(path: string, required: string[]): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const columns = parsed.meta.fields ?? [];
  const missing = required.filter((c) => !columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(missing, path);
  }
  return { columns, rows: parsed.data };
}

export function numeric(rows: Record<string, string>[], column: string): number[] {
  return rows.map((r) => Number(r[column]));
}

/** Group rows by a key column, preserving first-seen order. */
export function groupBy(
  rows: Record<string, string>[],
  column: string,
): Map<string, Record<string, string>[]> {
  const groups = new Map<string, Record<string, string>[]>();
  for (const row of rows) {
    const key = row[column];
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(key, [row]);
    }
  }
  return groups;
}

/** Mean of `value` for each distinct `key`, sorted by key ascending. */
export function meanByKey(
  rows: Record<string, string>[],
  keyColumn: string,
  valueColumn: string,
): { x: number[]; y: number[] } {
  const sums = new Map<number, { total: number; count: number }>();
  for (const row of rows) {
    const key = Number(row[keyColumn]);
    const value = Number(row[valueColumn]);
    const entry = sums.get(key) ?? { total: 0, count: 0 };
    entry.total += value;
    entry.count += 1;
    sums.set(key, entry);
  }
  const keys = [...sums.keys()].sort((a, b) => a - b);
  return {
    x: keys,
    y: keys.map((k) => {
      const { total, count } = sums.get(k)!;
      return total / count;
    }),
  };
}
