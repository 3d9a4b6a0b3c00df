import { FigureError } from "./errors.js";
import { groupBy, num, Row } from "./csv.js";
import { ExperimentManifest } from "./manifest.js";
import { barPanel, histogramPanel, linePanel, LineSeries, Panel } from "./panels.js";

export type PresetBuilder = (manifests: ExperimentManifest[]) => Panel[];

const INIT_MODES = ["random", "near_identity"] as const;
type InitMode = (typeof INIT_MODES)[number];

function modeOf(runId: string): InitMode | null {
  for (const mode of INIT_MODES) {
    if (runId.startsWith(`${mode}_d`)) return mode;
  }
  return null;
}

function runLabel(runId: string): string {
  const match = /_(r\d+)$/.exec(runId);
  return match ? match[1]! : runId;
}

function firstWithScenario(manifests: ExperimentManifest[], scenario: string): ExperimentManifest {
  const found = manifests.find((m) => m.scenario === scenario);
  if (!found) {
    const got = manifests.map((m) => m.scenario).join(", ") || "none";
    throw new FigureError(`no manifest with scenario ${scenario} was given (got: ${got})`);
  }
  return found;
}

function allWithScenario(manifests: ExperimentManifest[], scenario: string): ExperimentManifest[] {
  const found = manifests.filter((m) => m.scenario === scenario);
  if (found.length === 0) {
    const got = manifests.map((m) => m.scenario).join(", ") || "none";
    throw new FigureError(`no manifest with scenario ${scenario} was given (got: ${got})`);
  }
  return found;
}

function points(rows: Row[], yCol: string, map?: (y: number) => number): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  for (const row of rows) {
    const x = num(row, "iteration");
    const y = num(row, yCol);
    if (x === null || y === null) continue;
    pts.push([x, map ? map(y) : y]);
  }
  return pts;
}

function sortedKs(rows: Row[]): number[] {
  const ks = new Set<number>();
  for (const row of rows) {
    const k = num(row, "k");
    if (k !== null) ks.add(k);
  }
  return [...ks].sort((a, b) => a - b);
}

function perRunSeries(rows: Row[], yCol: string, opts?: { dashed?: boolean }): LineSeries[] {
  return [...groupBy(rows, "run_id").entries()].map(([rid, runRows]) => ({
    label: runLabel(rid),
    points: points(runRows, yCol),
    ...(opts?.dashed ? { dashed: true } : {}),
  }));
}

const MODE_TITLES: Record<InitMode, string> = {
  random: "random start",
  near_identity: "near-identity start",
};

/** Exact optimization path with truncated re-evaluations overlaid (per mode). */
function evalPathPanels(m: ExperimentManifest, prefix: string, nameFor: (mode: InitMode) => string): Panel[] {
  const rows = m.trajectory();
  const panels: Panel[] = [];
  for (const mode of INIT_MODES) {
    const modeRows = rows.filter((r) => modeOf(r["run_id"] ?? "") === mode);
    if (modeRows.length === 0) continue;
    const exact = modeRows.filter((r) => r["strategy"] === "exact_opt");
    const evals = modeRows.filter((r) => r["strategy"] === "lwpp_eval");
    const series: LineSeries[] = [
      { label: "exact energy", points: points(exact, "cost_value"), color: "#000" },
      ...sortedKs(evals).map((k) => ({
        label: `truncated eval k=${k}`,
        points: points(evals.filter((r) => num(r, "k") === k), "cost_value"),
        dashed: true,
      })),
    ];
    panels.push(linePanel({
      name: nameFor(mode),
      title: `${prefix}: exact optimization, truncated evaluation (${MODE_TITLES[mode]})`,
      xLabel: "iteration",
      yLabel: "energy",
      series,
      refValue: m.groundStateEnergy,
      refLabel: "ground state",
    }));
  }
  if (panels.length === 0) {
    throw new FigureError(`${prefix}: trajectory has no exact-path rows for any init mode`);
  }
  return panels;
}

/** Truncated-cost optimization with exact re-evaluations overlaid (per mode). */
function lwppPathPanels(m: ExperimentManifest, prefix: string, nameFor: (mode: InitMode) => string): Panel[] {
  const rows = m.trajectory().filter((r) => r["strategy"] === "lwpp_opt");
  const panels: Panel[] = [];
  for (const mode of INIT_MODES) {
    const modeRows = rows.filter((r) => modeOf(r["run_id"] ?? "") === mode);
    if (modeRows.length === 0) continue;
    const series: LineSeries[] = [];
    for (const k of sortedKs(modeRows)) {
      const kRows = modeRows.filter((r) => num(r, "k") === k);
      series.push({ label: `truncated cost k=${k}`, points: points(kRows, "cost_value") });
      series.push({ label: `exact energy k=${k}`, points: points(kRows, "exact_energy"), dashed: true });
    }
    panels.push(linePanel({
      name: nameFor(mode),
      title: `${prefix}: truncated-cost optimization, exact evaluation (${MODE_TITLES[mode]})`,
      xLabel: "iteration",
      yLabel: "energy",
      series,
      refValue: m.groundStateEnergy,
      refLabel: "ground state",
    }));
  }
  if (panels.length === 0) {
    throw new FigureError(`${prefix}: trajectory has no truncated-optimization rows for any init mode`);
  }
  return panels;
}

function latticeLabel(row: Row): string {
  return `${row["lattice_rows"]}x${row["lattice_cols"]}`;
}

/** Top-decile accuracy versus depth, one line per strategy/k, panel per lattice. */
function accuracySweepPanels(manifests: ExperimentManifest[], prefix: string): Panel[] {
  const rows = manifests.flatMap((m) => m.summary());
  const panels: Panel[] = [];
  const byLattice = [...groupBy(rows, "lattice_rows").values()]
    .flatMap((g) => [...groupBy(g, "lattice_cols").values()]);
  byLattice.sort((a, b) => latticeLabel(a[0]!).localeCompare(latticeLabel(b[0]!)));
  for (const latticeRows of byLattice) {
    const lattice = latticeLabel(latticeRows[0]!);
    const series: LineSeries[] = [];
    const direct = latticeRows.filter((r) => r["strategy"] === "direct");
    if (direct.length > 0) {
      series.push({ label: "direct", points: sweepPoints(direct, "decile_relative_error") });
    }
    const staged = latticeRows.filter((r) => r["strategy"] === "lwpp_init");
    for (const k of sortedKs(staged)) {
      series.push({
        label: `pre-optimized k=${k}`,
        points: sweepPoints(staged.filter((r) => num(r, "k") === k), "decile_relative_error"),
      });
    }
    panels.push(linePanel({
      name: `${prefix}_${lattice}_accuracy`,
      title: `${prefix}: top-decile relative error vs depth (${lattice})`,
      xLabel: "circuit depth",
      yLabel: "relative error",
      series,
      yLog: true,
    }));
  }
  return panels;
}

function sweepPoints(rows: Row[], yCol: string): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  for (const row of rows) {
    const x = num(row, "depth");
    const y = num(row, yCol);
    if (x === null || y === null) continue;
    pts.push([x, y]);
  }
  pts.sort((a, b) => a[0] - b[0]);
  return pts;
}

/** Iterations needed to reach the direct runs' final accuracy, bars per depth. */
function speedupPanels(manifests: ExperimentManifest[], prefix: string): Panel[] {
  const rows = manifests.flatMap((m) => m.summary()).filter((r) => r["strategy"] === "lwpp_init");
  const panels: Panel[] = [];
  const byLattice = [...groupBy(rows, "lattice_rows").values()]
    .flatMap((g) => [...groupBy(g, "lattice_cols").values()]);
  byLattice.sort((a, b) => latticeLabel(a[0]!).localeCompare(latticeLabel(b[0]!)));
  for (const latticeRows of byLattice) {
    const lattice = latticeLabel(latticeRows[0]!);
    const depths = [...new Set(latticeRows.map((r) => Number(r["depth"])))].sort((a, b) => a - b);
    const bars = sortedKs(latticeRows).map((k) => ({
      label: `pre-optimized k=${k}`,
      values: depths.map((d) => {
        const cell = latticeRows.find((r) => num(r, "k") === k && num(r, "depth") === d);
        return cell ? num(cell, "median_iterations_to_target") : null;
      }),
    }));
    panels.push(barPanel({
      name: `${prefix}_${lattice}_speedup`,
      title: `${prefix}: median iterations to reach the direct-run final error (${lattice})`,
      xLabel: "circuit depth",
      yLabel: "iterations",
      categories: depths.map(String),
      bars,
    }));
  }
  return panels;
}

function buildFig1(manifests: ExperimentManifest[]): Panel[] {
  const evalPath = firstWithScenario(manifests, "eval_on_exact_path");
  const optPath = firstWithScenario(manifests, "lwpp_opt_exact_eval");
  // 2x2 layout: eval/opt columns, random/near-identity rows.
  return [
    ...evalPathPanels(evalPath, "fig1", (mode) => `fig1_${mode}_eval`),
    ...lwppPathPanels(optPath, "fig1", (mode) => `fig1_${mode}_opt`),
  ];
}

function buildFig2(manifests: ExperimentManifest[]): Panel[] {
  const m = firstWithScenario(manifests, "random_init_compare");
  const rows = m.trajectory();
  const direct = rows.filter((r) => r["strategy"] === "direct" && r["stage"] === "main");
  const staged = rows.filter((r) => r["strategy"] === "lwpp_init");
  const main = staged.filter((r) => r["stage"] === "main");
  const pre = staged.filter((r) => r["stage"] === "pre");
  const common = { xLabel: "iteration", refValue: m.groundStateEnergy, refLabel: "ground state" };
  return [
    linePanel({
      name: "fig2_direct", title: "fig2: direct optimization from random starts",
      yLabel: "energy", series: perRunSeries(direct, "cost_value"), ...common,
    }),
    linePanel({
      name: "fig2_lwpp_main", title: "fig2: main optimization after pre-optimization",
      yLabel: "energy", series: perRunSeries(main, "cost_value"), ...common,
    }),
    linePanel({
      name: "fig2_pre", title: "fig2: pre-optimization dynamics",
      xLabel: "iteration", yLabel: "truncated cost",
      series: perRunSeries(pre, "cost_value"),
    }),
    linePanel({
      name: "fig2_pre_log", title: "fig2: pre-optimization dynamics (magnitude)",
      xLabel: "iteration", yLabel: "|truncated cost|",
      series: [...groupBy(pre, "run_id").entries()].map(([rid, runRows]) => ({
        label: runLabel(rid),
        points: points(runRows, "cost_value", Math.abs),
      })),
      yLog: true,
    }),
  ];
}

function buildFig4(manifests: ExperimentManifest[]): Panel[] {
  const m = firstWithScenario(manifests, "near_identity_compare");
  const rows = m.trajectory();
  const direct = rows.filter((r) => r["strategy"] === "direct" && r["stage"] === "main");
  const staged = rows.filter((r) => r["strategy"] === "lwpp_init");
  return [
    linePanel({
      name: "fig4_direct", title: "fig4: direct optimization from near-identity starts",
      xLabel: "iteration", yLabel: "relative error",
      series: perRunSeries(direct, "relative_error"), yLog: true,
    }),
    linePanel({
      name: "fig4_lwpp_init", title: "fig4: pre-optimized runs (pre stage dashed)",
      xLabel: "iteration", yLabel: "relative error",
      series: [
        ...perRunSeries(staged.filter((r) => r["stage"] === "pre"), "relative_error", { dashed: true }),
        ...perRunSeries(staged.filter((r) => r["stage"] === "main"), "relative_error"),
      ].filter((s) => s.points.length > 0),
      yLog: true,
    }),
  ];
}

function buildS3(manifests: ExperimentManifest[]): Panel[] {
  const m = firstWithScenario(manifests, "resampling_control");
  const params = m.params().filter((r) => r["strategy"] === "lwpp_init");
  const values = (stage: string): number[] =>
    params.filter((r) => r["stage"] === stage).map((r) => num(r, "value") ?? 0);
  const rows = m.trajectory();
  const keptMain = rows.filter((r) => r["strategy"] === "lwpp_init" && r["stage"] === "main");
  const resampledMain = rows.filter((r) => r["strategy"] === "lwpp_resampled" && r["stage"] === "main");
  return [
    histogramPanel({
      name: "s3_init_params", title: "s3: initial parameter distribution",
      xLabel: "parameter value", values: values("init"),
    }),
    linePanel({
      name: "s3_energy", title: "s3: main optimization with pre-optimized parameters",
      xLabel: "iteration", yLabel: "energy",
      series: perRunSeries(keptMain, "cost_value"),
      refValue: m.groundStateEnergy, refLabel: "ground state",
    }),
    histogramPanel({
      name: "s3_pre_params", title: "s3: parameter distribution after pre-optimization",
      xLabel: "parameter value", values: values("pre_final"),
    }),
    linePanel({
      name: "s3_accuracy", title: "s3: accuracy with pre-optimized parameters",
      xLabel: "iteration", yLabel: "relative error",
      series: perRunSeries(keptMain, "relative_error"), yLog: true,
    }),
    linePanel({
      name: "s3_resampled_accuracy", title: "s3: accuracy with resampled parameters",
      xLabel: "iteration", yLabel: "relative error",
      series: perRunSeries(resampledMain, "relative_error"), yLog: true,
    }),
  ];
}

function buildS4(manifests: ExperimentManifest[]): Panel[] {
  const m = firstWithScenario(manifests, "rugged_landscape");
  const rows = m.trajectory();
  const common = {
    xLabel: "iteration", yLabel: "energy",
    refValue: m.groundStateEnergy, refLabel: "ground state",
  };
  return [
    linePanel({
      name: "s4_direct", title: "s4: direct optimization on the distorted circuit",
      series: perRunSeries(rows.filter((r) => r["strategy"] === "direct" && r["stage"] === "main"), "cost_value"),
      ...common,
    }),
    linePanel({
      name: "s4_lwpp_init", title: "s4: pre-optimized runs on the distorted circuit",
      series: perRunSeries(rows.filter((r) => r["strategy"] === "lwpp_init" && r["stage"] === "main"), "cost_value"),
      ...common,
    }),
  ];
}

export const PRESETS: Record<string, PresetBuilder> = {
  fig1: buildFig1,
  fig1a: (ms) => evalPathPanels(firstWithScenario(ms, "eval_on_exact_path"), "fig1a", (mode) => `fig1a_${mode}`),
  fig1b: (ms) => lwppPathPanels(firstWithScenario(ms, "lwpp_opt_exact_eval"), "fig1b", (mode) => `fig1b_${mode}`),
  fig2: buildFig2,
  fig3: (ms) => accuracySweepPanels(allWithScenario(ms, "random_init_compare"), "fig3"),
  fig4: buildFig4,
  fig5: (ms) => {
    const pool = allWithScenario(ms, "near_identity_compare");
    return [...accuracySweepPanels(pool, "fig5"), ...speedupPanels(pool, "fig5")];
  },
  s2: (ms) => {
    const pool = allWithScenario(ms, "near_identity_compare");
    return [...accuracySweepPanels(pool, "s2"), ...speedupPanels(pool, "s2")];
  },
  s3: buildS3,
  s4: buildS4,
};

export const PRESET_NAMES = Object.keys(PRESETS).sort();

function inferPreset(m: ExperimentManifest): string {
  switch (m.scenario) {
    case "eval_on_exact_path": return "fig1a";
    case "lwpp_opt_exact_eval": return "fig1b";
    case "random_init_compare": return m.depths.length > 1 ? "fig3" : "fig2";
    case "near_identity_compare": return m.depths.length > 1 ? "fig5" : "fig4";
    case "resampling_control": return "s3";
    case "rugged_landscape": return "s4";
    default:
      throw new FigureError(`no default figure for scenario ${m.scenario}`);
  }
}

/**
 * Resolve a preset (or infer one per manifest scenario) into concrete panels.
 * Panel names double as output file stems, so they must stay unique.
 */
export function buildFigures(manifests: ExperimentManifest[], preset?: string): Panel[] {
  if (manifests.length === 0) {
    throw new FigureError("at least one manifest is required");
  }
  let panels: Panel[];
  if (preset !== undefined) {
    const builder = PRESETS[preset];
    if (!builder) {
      throw new FigureError(`unknown preset ${preset}; valid: ${PRESET_NAMES.join(", ")}`);
    }
    panels = builder(manifests);
  } else {
    const order: string[] = [];
    const groups = new Map<string, ExperimentManifest[]>();
    for (const m of manifests) {
      const name = inferPreset(m);
      if (!groups.has(name)) {
        groups.set(name, []);
        order.push(name);
      }
      groups.get(name)!.push(m);
    }
    panels = order.flatMap((name) => PRESETS[name]!(groups.get(name)!));
  }
  const seen = new Set<string>();
  for (const panel of panels) {
    if (seen.has(panel.name)) {
      throw new FigureError(`duplicate panel name ${panel.name}; pass an explicit --preset`);
    }
    seen.add(panel.name);
  }
  return panels;
}
