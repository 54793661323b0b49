import { Table, requireColumns } from "./csv.js";

export interface Grid {
  xs: number[];
  ys: number[];
  /** values[yi][xi]; null where the dataset has no row for that cell */
  values: (number | null)[][];
}

function uniqueSorted(values: number[]): number[] {
  const sorted = [...values].sort((a, b) => a - b);
  const out: number[] = [];
  for (const v of sorted) {
    if (out.length === 0 || Math.abs(v - out[out.length - 1]) > 1e-12) {
      out.push(v);
    }
  }
  return out;
}

function indexOfClose(axis: number[], v: number): number {
  let lo = 0;
  let hi = axis.length - 1;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (axis[mid] < v - 1e-12) lo = mid + 1;
    else hi = mid;
  }
  if (Math.abs(axis[lo] - v) > 1e-9) {
    throw new Error(`value ${v} not on the grid axis`);
  }
  return lo;
}

/** Pivot long-format rows into a dense 2-D grid keyed by (xCol, yCol). */
export function pivotGrid(
  table: Table,
  xCol: string,
  yCol: string,
  valueCol: string,
): Grid {
  requireColumns(table, [xCol, yCol, valueCol]);
  if (table.rows.length === 0) {
    throw new Error("dataset is empty");
  }
  const xs = uniqueSorted(table.rows.map((r) => r[xCol]));
  const ys = uniqueSorted(table.rows.map((r) => r[yCol]));
  const values: (number | null)[][] = ys.map(() =>
    new Array<number | null>(xs.length).fill(null),
  );
  for (const row of table.rows) {
    const xi = indexOfClose(xs, row[xCol]);
    const yi = indexOfClose(ys, row[yCol]);
    values[yi][xi] = row[valueCol];
  }
  return { xs, ys, values };
}

/** Finite extrema over the non-missing cells. */
export function gridRange(grid: Grid): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const row of grid.values) {
    for (const v of row) {
      if (v === null || !Number.isFinite(v)) continue;
      min = Math.min(min, v);
      max = Math.max(max, v);
    }
  }
  if (min > max) {
    throw new Error("grid has no finite values");
  }
  return { min, max };
}
