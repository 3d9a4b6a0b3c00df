#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { FigureError } from "./errors.js";
import { buildFigures, PRESET_NAMES } from "./figures.js";
import { loadManifest } from "./manifest.js";
import { writePanels } from "./render.js";

export interface CliResult {
  written: string[];
}

/** Parse argv (without the node/script prefix) and render the requested figures. */
export function run(argv: string[]): CliResult {
  const args = yargs(argv)
    .scriptName("pauliprop-figures")
    .usage("$0 --manifest M [--manifest M2 ...] --out-dir D [--preset NAME]")
    .option("manifest", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "path to an experiment manifest.json (repeatable)",
    })
    .option("out-dir", {
      type: "string",
      demandOption: true,
      describe: "directory for the rendered SVG files",
    })
    .option("preset", {
      type: "string",
      choices: PRESET_NAMES,
      describe: "figure preset; defaults to one per manifest scenario",
    })
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      throw new FigureError(msg);
    })
    .parseSync();

  const manifests = args.manifest.map((path) => loadManifest(path));
  const panels = buildFigures(manifests, args.preset);
  const written = writePanels(panels, args.outDir);
  return { written };
}

export function main(): void {
  try {
    const { written } = run(hideBin(process.argv));
    for (const path of written) console.log(path);
  } catch (err) {
    if (err instanceof FigureError) {
      console.error(`error: ${err.message}`);
      process.exitCode = 1;
    } else {
      console.error(`unexpected failure: ${(err as Error).stack ?? err}`);
      process.exitCode = 2;
    }
  }
}

// Invoke only when executed as the bin entry, not when imported by tests.
if (process.argv[1] && /cli\.(js|ts)$/.test(process.argv[1])) {
  main();
}
