#!/usr/bin/env node
/** Usage: bench-plots <csv> <qsweep_welfare|qsweep_envy|domain_loss> <out> [--png] */

import { FIGURES, FigureKind, plotFile } from "./plot.js";

export function main(argv: string[]): number {
  const args = argv.filter((a) => a !== "--png");
  const png = argv.includes("--png");
  if (args.length !== 3) {
    console.error("usage: bench-plots <csv> <figure> <out> [--png]");
    console.error(`figures: ${FIGURES.join(", ")}`);
    return 2;
  }
  const [csvPath, figure, outPath] = args;
  if (!FIGURES.includes(figure as FigureKind)) {
    console.error(`unknown figure ${JSON.stringify(figure)}; expected one of ${FIGURES.join(", ")}`);
    return 2;
  }
  try {
    plotFile(csvPath, figure as FigureKind, outPath, { png });
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
