import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { FigureError } from "./errors.js";
import { loadCsv, PARAMS_COLUMNS, Row, SUMMARY_COLUMNS, TRAJECTORY_COLUMNS } from "./csv.js";

type ArtifactKey = "trajectory_csv" | "summary_csv" | "params_csv";

export interface ExperimentManifest {
  scenario: string;
  depths: number[];
  kValues: number[];
  lattice: { rows: number; cols: number };
  /** Reference energy for horizontal guide lines; null when absent. */
  groundStateEnergy: number | null;
  dir: string;
  artifactPath(key: ArtifactKey): string;
  trajectory(): Row[];
  summary(): Row[];
  params(): Row[];
}

function requireNumberArray(value: unknown, label: string, path: string): number[] {
  if (!Array.isArray(value) || value.some((v) => typeof v !== "number")) {
    throw new FigureError(`${path}: config.${label} must be a list of numbers`);
  }
  return value as number[];
}

/** Read a run manifest and wire up lazily-loaded views of its CSV artifacts. */
export function loadManifest(path: string): ExperimentManifest {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new FigureError(`cannot read manifest ${path}: ${(err as Error).message}`);
  }
  const doc = raw as Record<string, unknown>;
  if (doc["schema_version"] !== 1) {
    throw new FigureError(`${path}: unsupported manifest schema_version ${doc["schema_version"]}`);
  }
  const scenario = doc["scenario"];
  if (typeof scenario !== "string") {
    throw new FigureError(`${path}: manifest has no scenario`);
  }
  const config = (doc["config"] ?? {}) as Record<string, unknown>;
  const lattice = (config["lattice"] ?? {}) as Record<string, unknown>;
  if (typeof lattice["rows"] !== "number" || typeof lattice["cols"] !== "number") {
    throw new FigureError(`${path}: config.lattice.rows/cols missing`);
  }
  const artifacts = (doc["artifacts"] ?? {}) as Record<string, unknown>;
  const dir = dirname(resolve(path));
  const artifactPath = (key: ArtifactKey): string => {
    const name = artifacts[key];
    if (typeof name !== "string") {
      throw new FigureError(`${path}: manifest lists no ${key} artifact`);
    }
    return resolve(dir, name);
  };
  const gs = (doc["ground_state"] ?? {}) as Record<string, unknown>;
  const cache = new Map<ArtifactKey, Row[]>();
  const load = (key: ArtifactKey, cols: readonly string[]): Row[] => {
    let rows = cache.get(key);
    if (!rows) {
      rows = loadCsv(artifactPath(key), cols);
      cache.set(key, rows);
    }
    return rows;
  };
  return {
    scenario,
    depths: requireNumberArray(config["depths"], "depths", path),
    kValues: requireNumberArray(config["k_values"], "k_values", path),
    lattice: { rows: lattice["rows"], cols: lattice["cols"] },
    groundStateEnergy: typeof gs["energy"] === "number" ? gs["energy"] : null,
    dir,
    artifactPath,
    trajectory: () => load("trajectory_csv", TRAJECTORY_COLUMNS),
    summary: () => load("summary_csv", SUMMARY_COLUMNS),
    params: () => load("params_csv", PARAMS_COLUMNS),
  };
}
