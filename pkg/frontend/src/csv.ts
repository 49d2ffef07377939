import { readFileSync } from "fs";

export interface Table {
  header: string[];
  rows: string[][];
}

/** Minimal CSV reader for the experiment outputs: comma-separated, no quoting. */
export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: no header row");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  for (const [i, row] of rows.entries()) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `row ${i + 2} has ${row.length} cells, header has ${header.length}`,
      );
    }
  }
  return { header, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

export function toRecords(table: Table): Record<string, string>[] {
  return table.rows.map((row) =>
    Object.fromEntries(table.header.map((h, i) => [h, row[i]])),
  );
}

export class SchemaError extends Error {}

/** Exact-header check; the message carries the column diff. */
export function checkHeader(expected: string[], got: string[]): void {
  const missing = expected.filter((c) => !got.includes(c));
  const unexpected = got.filter((c) => !expected.includes(c));
  if (missing.length || unexpected.length) {
    const parts: string[] = [];
    if (missing.length) parts.push(`missing columns: ${missing.join(", ")}`);
    if (unexpected.length) parts.push(`unexpected columns: ${unexpected.join(", ")}`);
    throw new SchemaError(parts.join("; "));
  }
}
