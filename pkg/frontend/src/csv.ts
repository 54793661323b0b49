import Papa from "papaparse";

export interface Table {
  columns: string[];
  rows: Record<string, number>[];
}

/** Parse a numeric CSV with a mandatory header row. */
export function parseCsv(text: string): Table {
  const result = Papa.parse<Record<string, number>>(text.trim(), {
    header: true,
    delimiter: ",",
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (result.errors.length > 0) {
    const first = result.errors[0];
    throw new Error(`CSV parse error at row ${first.row}: ${first.message}`);
  }
  const columns = result.meta.fields ?? [];
  if (columns.length === 0) {
    throw new Error("CSV has no header row");
  }
  return { columns, rows: result.data };
}

/** Throw when any of the named columns is missing from the table. */
export function requireColumns(table: Table, names: string[]): void {
  const missing = names.filter((n) => !table.columns.includes(n));
  if (missing.length > 0) {
    throw new Error(
      `missing column(s) ${missing.join(", ")}; have ${table.columns.join(", ")}`,
    );
  }
}
