import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { FigureError } from "../src/errors";
import { buildFigures, PRESET_NAMES } from "../src/figures";
import { loadManifest } from "../src/manifest";
import { histogramPanel, linePanel } from "../src/panels";

const FIXTURES = join(__dirname, "fixtures");

function manifest(name: string) {
  return loadManifest(join(FIXTURES, name, "manifest.json"));
}

function names(panels: { name: string }[]): string[] {
  return panels.map((p) => p.name);
}

function seriesOf(panel: { option: any }): any[] {
  return panel.option.series as any[];
}

describe("manifest loading", () => {
  it("exposes scenario, lattice, and the recorded reference energy", () => {
    const m = manifest("near_single");
    expect(m.scenario).toBe("near_identity_compare");
    expect(m.lattice).toEqual({ rows: 2, cols: 2 });
    expect(m.depths).toEqual([2]);
    expect(m.groundStateEnergy).toBeCloseTo(-6.204227403912752, 10);
  });

  it("caches artifact loads", () => {
    const m = manifest("near_single");
    expect(m.trajectory()).toBe(m.trajectory());
  });

  it("rejects files that are not manifests", () => {
    expect(() => loadManifest(join(FIXTURES, "near_single", "trajectory.csv"))).toThrow(FigureError);
  });
});

describe("trajectory presets", () => {
  it("fig1 renders four panels from the two path scenarios", () => {
    const panels = buildFigures([manifest("eval_path"), manifest("lwpp_path")], "fig1");
    expect(names(panels)).toEqual([
      "fig1_random_eval",
      "fig1_near_identity_eval",
      "fig1_random_opt",
      "fig1_near_identity_opt",
    ]);
  });

  it("fig1 eval panels carry one exact line plus one dashed line per k", () => {
    const panels = buildFigures([manifest("eval_path"), manifest("lwpp_path")], "fig1");
    const series = seriesOf(panels[0]!);
    expect(series.map((s) => s.name)).toEqual([
      "exact energy",
      "truncated eval k=1",
      "truncated eval k=2",
    ]);
    expect(series[1].lineStyle.type).toBe("dashed");
    // ground-state guide line rides on the first series
    expect(series[0].markLine.data[0].yAxis).toBeCloseTo(-6.204227403912752, 10);
  });

  it("fig1a and fig1b stand alone with one panel per init mode", () => {
    expect(names(buildFigures([manifest("eval_path")], "fig1a"))).toEqual([
      "fig1a_random",
      "fig1a_near_identity",
    ]);
    expect(names(buildFigures([manifest("lwpp_path")], "fig1b"))).toEqual([
      "fig1b_random",
      "fig1b_near_identity",
    ]);
  });

  it("fig2 renders the four panels including the log-magnitude view", () => {
    const panels = buildFigures([manifest("random_single")], "fig2");
    expect(names(panels)).toEqual(["fig2_direct", "fig2_lwpp_main", "fig2_pre", "fig2_pre_log"]);
    const log = panels[3]!.option as any;
    expect(log.yAxis.type).toBe("log");
    for (const s of seriesOf(panels[3]!)) {
      for (const [, y] of s.data as Array<[number, number]>) {
        expect(y).toBeGreaterThan(0);
      }
    }
  });

  it("fig4 shows direct and pre-optimized error curves, pre stage dashed", () => {
    const panels = buildFigures([manifest("near_single")], "fig4");
    expect(names(panels)).toEqual(["fig4_direct", "fig4_lwpp_init"]);
    const styles = seriesOf(panels[1]!).map((s) => s.lineStyle.type);
    expect(styles).toContain("dashed");
    expect(styles).toContain("solid");
  });

  it("s3 renders histograms and the resampled comparison", () => {
    const panels = buildFigures([manifest("resampling")], "s3");
    expect(names(panels)).toEqual([
      "s3_init_params", "s3_energy", "s3_pre_params", "s3_accuracy", "s3_resampled_accuracy",
    ]);
    const hist = seriesOf(panels[0]!)[0];
    const totalCount = (hist.data as number[]).reduce((a, b) => a + b, 0);
    expect(totalCount).toBe(3 * 24); // three runs, 24 parameters each
  });

  it("s4 renders the two strategy panels", () => {
    expect(names(buildFigures([manifest("rugged")], "s4"))).toEqual(["s4_direct", "s4_lwpp_init"]);
  });
});

describe("sweep presets", () => {
  it("fig3 pools manifests into one panel per lattice", () => {
    const panels = buildFigures(
      [manifest("random_sweep_2x2"), manifest("random_sweep_2x3")], "fig3",
    );
    expect(names(panels)).toEqual(["fig3_2x2_accuracy", "fig3_2x3_accuracy"]);
    const series = seriesOf(panels[0]!);
    expect(series.map((s) => s.name)).toEqual(["direct", "pre-optimized k=2"]);
    // two depths in the fixture sweep -> two points per line
    expect(series[0].data).toHaveLength(2);
    expect((panels[0]!.option as any).yAxis.type).toBe("log");
  });

  it("fig5 adds a speedup panel per lattice", () => {
    const panels = buildFigures(
      [manifest("near_sweep_2x2"), manifest("near_sweep_2x3")], "fig5",
    );
    expect(names(panels)).toEqual([
      "fig5_2x2_accuracy", "fig5_2x3_accuracy", "fig5_2x2_speedup", "fig5_2x3_speedup",
    ]);
    const bars = panels[2]!.option as any;
    expect(bars.xAxis.data).toEqual(["1", "2"]);
    expect(bars.series[0].type).toBe("bar");
  });

  it("s2 uses the same layout under its own name", () => {
    const panels = buildFigures([manifest("near_sweep_2x2")], "s2");
    expect(names(panels)).toEqual(["s2_2x2_accuracy", "s2_2x2_speedup"]);
  });
});

describe("preset selection", () => {
  it("rejects unknown presets and lists the valid ones", () => {
    expect(() => buildFigures([manifest("near_single")], "fig9")).toThrow(/valid:.*fig1/);
  });

  it("rejects a preset whose scenario is absent", () => {
    expect(() => buildFigures([manifest("near_single")], "s4")).toThrow(/rugged_landscape/);
  });

  it("infers a preset per manifest when none is given", () => {
    expect(names(buildFigures([manifest("near_single")]))).toEqual(["fig4_direct", "fig4_lwpp_init"]);
    expect(names(buildFigures([manifest("near_sweep_2x2")]))).toEqual([
      "fig5_2x2_accuracy", "fig5_2x2_speedup",
    ]);
    const mixed = buildFigures([manifest("eval_path"), manifest("lwpp_path")]);
    expect(names(mixed)).toEqual([
      "fig1a_random", "fig1a_near_identity", "fig1b_random", "fig1b_near_identity",
    ]);
  });

  it("keeps the preset name list sorted for the CLI", () => {
    expect(PRESET_NAMES).toEqual([...PRESET_NAMES].sort());
  });
});

describe("panel guards", () => {
  it("log panels reject non-positive values with a clear message", () => {
    expect(() =>
      linePanel({
        name: "p", title: "t", xLabel: "x", yLabel: "y", yLog: true,
        series: [{ label: "s", points: [[1, 0.5], [2, -0.1]] }],
      }),
    ).toThrow(/log scale cannot show s value -0.1 at x=2/);
  });

  it("empty selections are an error, not an empty image", () => {
    expect(() =>
      linePanel({ name: "p", title: "t", xLabel: "x", yLabel: "y", series: [] }),
    ).toThrow(/empty selection/);
  });

  it("a constant histogram collapses to a single bin", () => {
    const panel = histogramPanel({ name: "h", title: "t", xLabel: "v", values: [0, 0, 0] });
    expect((panel.option as any).series[0].data).toEqual([3]);
  });
});
