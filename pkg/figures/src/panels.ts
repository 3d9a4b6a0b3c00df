import type { EChartsOption, SeriesOption } from "echarts";
import { FigureError } from "./errors.js";

export interface Panel {
  /** Output file stem; the renderer appends `.svg`. */
  name: string;
  option: EChartsOption;
}

export interface LineSeries {
  label: string;
  points: Array<[number, number]>;
  dashed?: boolean;
  color?: string;
}

export interface LinePanelSpec {
  name: string;
  title: string;
  xLabel: string;
  yLabel: string;
  series: LineSeries[];
  yLog?: boolean;
  /** Horizontal guide line, e.g. the recorded ground-state energy. */
  refValue?: number | null;
  refLabel?: string;
}

const GRID = { left: 70, right: 24, top: 56, bottom: 48 };

function baseOption(title: string): EChartsOption {
  return {
    animation: false,
    title: { text: title, left: "center", textStyle: { fontSize: 14 } },
    grid: GRID,
    legend: { top: 26, type: "scroll" },
  };
}

function axis(name: string, log: boolean) {
  return {
    type: log ? ("log" as const) : ("value" as const),
    name,
    nameLocation: "middle" as const,
    nameGap: log ? 48 : 36,
  };
}

/**
 * Energy or error curves against iteration count. Log panels refuse
 * non-positive values outright: silently dropping points would misrepresent
 * the data, so the caller must map it (e.g. plot magnitudes) first.
 */
export function linePanel(spec: LinePanelSpec): Panel {
  if (spec.series.length === 0 || spec.series.every((s) => s.points.length === 0)) {
    throw new FigureError(`panel ${spec.name}: empty selection, nothing to plot`);
  }
  if (spec.yLog) {
    for (const s of spec.series) {
      const bad = s.points.find(([, y]) => y <= 0);
      if (bad) {
        throw new FigureError(
          `panel ${spec.name}: log scale cannot show ${s.label} value ${bad[1]} at x=${bad[0]}`,
        );
      }
    }
  }
  const series: SeriesOption[] = spec.series.map((s) => ({
    name: s.label,
    type: "line",
    data: s.points,
    showSymbol: s.points.length <= 2,
    lineStyle: { type: s.dashed ? "dashed" : "solid", width: 1.5 },
    ...(s.color ? { color: s.color } : {}),
  }));
  if (spec.refValue !== null && spec.refValue !== undefined && series[0]) {
    series[0].markLine = {
      silent: true,
      symbol: "none",
      label: { formatter: spec.refLabel ?? "", position: "insideEndTop" },
      lineStyle: { type: "dotted", color: "#555" },
      data: [{ yAxis: spec.refValue }],
    };
  }
  return {
    name: spec.name,
    option: {
      ...baseOption(spec.title),
      xAxis: axis(spec.xLabel, false),
      yAxis: axis(spec.yLabel, spec.yLog ?? false),
      series,
    },
  };
}

export interface BarPanelSpec {
  name: string;
  title: string;
  xLabel: string;
  yLabel: string;
  categories: string[];
  bars: Array<{ label: string; values: Array<number | null> }>;
}

/** Grouped bars over categorical x (e.g. iteration counts per depth). */
export function barPanel(spec: BarPanelSpec): Panel {
  if (spec.bars.length === 0 || spec.categories.length === 0) {
    throw new FigureError(`panel ${spec.name}: empty selection, nothing to plot`);
  }
  return {
    name: spec.name,
    option: {
      ...baseOption(spec.title),
      xAxis: {
        type: "category",
        data: spec.categories,
        name: spec.xLabel,
        nameLocation: "middle",
        nameGap: 32,
      },
      yAxis: axis(spec.yLabel, false),
      series: spec.bars.map((b) => ({
        name: b.label,
        type: "bar",
        data: b.values.map((v) => (v === null ? "-" : v)),
      })),
    },
  };
}

export interface HistogramPanelSpec {
  name: string;
  title: string;
  xLabel: string;
  values: number[];
  bins?: number;
}

/** Fixed-width binning; counts are the only derived quantity. */
export function histogramPanel(spec: HistogramPanelSpec): Panel {
  if (spec.values.length === 0) {
    throw new FigureError(`panel ${spec.name}: empty selection, nothing to plot`);
  }
  const bins = spec.bins ?? 40;
  const lo = Math.min(...spec.values);
  const hi = Math.max(...spec.values);
  const width = hi > lo ? (hi - lo) / bins : 1;
  const counts = new Array<number>(hi > lo ? bins : 1).fill(0);
  for (const v of spec.values) {
    const idx = Math.min(counts.length - 1, Math.floor((v - lo) / width));
    counts[idx] = (counts[idx] ?? 0) + 1;
  }
  const centers = counts.map((_, i) => (lo + (i + 0.5) * width).toPrecision(3));
  return {
    name: spec.name,
    option: {
      ...baseOption(spec.title),
      xAxis: {
        type: "category",
        data: centers,
        name: spec.xLabel,
        nameLocation: "middle",
        nameGap: 32,
        axisLabel: { interval: Math.max(0, Math.floor(counts.length / 8) - 1) },
      },
      yAxis: axis("count", false),
      series: [{ type: "bar", data: counts, barCategoryGap: "0%" }],
    },
  };
}
