/**
 * Minimal CSV reader for the solver's numeric tables: one header row,
 * '.' decimals, comma separator.
 */

export interface Table {
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("CSV is empty");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(
        `CSV row ${i} has ${parts.length} fields, expected ${columns.length}`
      );
    }
    rows.push(parts.map((p) => Number(p)));
  }
  return { columns, rows };
}

/** Column values by name; throws a descriptive error when missing. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `CSV is missing column '${name}' (have: ${table.columns.join(", ")})`
    );
  }
  return table.rows.map((r) => r[idx]);
}

export function requireColumns(table: Table, names: string[]): void {
  for (const n of names) {
    column(table, n);
  }
}
