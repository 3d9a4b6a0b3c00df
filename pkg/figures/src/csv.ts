import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { FigureError } from "./errors.js";

/** Every cell stays a string; missing values are empty strings. */
export type Row = Record<string, string>;

export const TRAJECTORY_COLUMNS = [
  "run_id", "seed", "scenario", "strategy", "lattice_rows", "lattice_cols",
  "depth", "k", "stage", "iteration", "cost_value", "exact_energy",
  "relative_error", "grad_norm", "wall_ms",
] as const;

export const SUMMARY_COLUMNS = [
  "scenario", "lattice_rows", "lattice_cols", "depth", "k", "strategy",
  "init_mode", "runs", "decile_relative_error", "median_relative_error",
  "best_relative_error", "median_iterations_to_target",
] as const;

export const PARAMS_COLUMNS = [
  "run_id", "strategy", "stage", "param_index", "value",
] as const;

/**
 * Load a CSV and require both the expected header and at least one data row.
 * A header-only file is a hard error: there is nothing to plot from it.
 */
export function loadCsv(path: string, required: readonly string[]): Row[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new FigureError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const parsed = Papa.parse<Row>(text, { header: true, skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    throw new FigureError(`${path}: malformed CSV (${first.message} at row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = required.filter((col) => !fields.includes(col));
  if (missing.length > 0) {
    throw new FigureError(`${path}: missing column(s) ${missing.join(", ")}`);
  }
  if (parsed.data.length === 0) {
    throw new FigureError(`${path}: no data rows (header only)`);
  }
  return parsed.data;
}

/** Parse one cell as a number; empty cells become null, garbage is an error. */
export function num(row: Row, col: string): number | null {
  const cell = row[col];
  if (cell === undefined || cell === "") return null;
  const value = Number(cell);
  if (!Number.isFinite(value)) {
    throw new FigureError(`column ${col}: cannot plot non-numeric cell ${JSON.stringify(cell)}`);
  }
  return value;
}

/** Group rows by a key column, preserving file order inside each group. */
export function groupBy(rows: Row[], col: string): Map<string, Row[]> {
  const groups = new Map<string, Row[]>();
  for (const row of rows) {
    const key = row[col] ?? "";
    const bucket = groups.get(key);
    if (bucket) bucket.push(row);
    else groups.set(key, [row]);
  }
  return groups;
}
