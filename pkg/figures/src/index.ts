export { FigureError } from "./errors.js";
export { loadCsv, num, groupBy, TRAJECTORY_COLUMNS, SUMMARY_COLUMNS, PARAMS_COLUMNS } from "./csv.js";
export type { Row } from "./csv.js";
export { loadManifest } from "./manifest.js";
export type { ExperimentManifest } from "./manifest.js";
export { linePanel, barPanel, histogramPanel } from "./panels.js";
export type { Panel, LineSeries, LinePanelSpec, BarPanelSpec, HistogramPanelSpec } from "./panels.js";
export { buildFigures, PRESETS, PRESET_NAMES } from "./figures.js";
export { renderSvg, writePanels } from "./render.js";
export { run } from "./cli.js";
