import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import * as echarts from "echarts";
import { FigureError } from "./errors.js";
import { Panel } from "./panels.js";

export interface RenderOptions {
  width?: number;
  height?: number;
}

/**
 * Generated class names and clip-path ids embed process-wide counters, so a
 * re-render of the same data would differ byte-wise. Renumber them by first
 * appearance; every reference uses the same literal, so the document stays
 * internally consistent.
 */
function stableIds(svg: string): string {
  const mapping = new Map<string, string>();
  const counters = new Map<string, number>();
  return svg.replace(/\bzr\d+-(cls-|c)(\d+)\b/g, (token, kind: string) => {
    let mapped = mapping.get(token);
    if (mapped === undefined) {
      const next = counters.get(kind) ?? 0;
      counters.set(kind, next + 1);
      mapped = `zr-${kind}${next}`;
      mapping.set(token, mapped);
    }
    return mapped;
  });
}

/** Render one chart option to an SVG document string (no DOM involved). */
export function renderSvg(panel: Panel, opts: RenderOptions = {}): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: opts.width ?? 840,
    height: opts.height ?? 560,
  });
  try {
    chart.setOption(panel.option);
    return stableIds(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/** Write every panel as `<out-dir>/<name>.svg`; returns the paths written. */
export function writePanels(panels: Panel[], outDir: string, opts: RenderOptions = {}): string[] {
  try {
    mkdirSync(outDir, { recursive: true });
  } catch (err) {
    throw new FigureError(`cannot create ${outDir}: ${(err as Error).message}`);
  }
  const written: string[] = [];
  for (const panel of panels) {
    const svg = renderSvg(panel, opts);
    const path = join(outDir, `${panel.name}.svg`);
    try {
      writeFileSync(path, svg, "utf8");
    } catch (err) {
      throw new FigureError(`cannot write ${path}: ${(err as Error).message}`);
    }
    written.push(path);
  }
  return written;
}
