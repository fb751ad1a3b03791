/**
 * File-level entry points: read a bench CSV, build a figure, write SVG (or
 * PNG behind the flag).  Rendering happens before the output file is opened,
 * so a schema error never leaves a partial file behind.  Inputs are opened
 * read-only and never modified.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { buildChart, FigureKind, FIGURES } from "./chart.js";
import { CsvError, parseBenchCsv } from "./csv.js";
import { renderPng } from "./png.js";
import { renderSvg } from "./svg.js";

export { FIGURES, CsvError };
export type { FigureKind };

export function renderFigure(csvText: string, figure: FigureKind): string {
  return renderSvg(buildChart(parseBenchCsv(csvText), figure));
}

export function renderFigurePng(csvText: string, figure: FigureKind): Buffer {
  return renderPng(buildChart(parseBenchCsv(csvText), figure));
}

export function plotFile(
  csvPath: string,
  figure: FigureKind,
  outPath: string,
  options: { png?: boolean } = {}
): void {
  const text = readFileSync(csvPath, "utf-8");
  if (options.png) {
    writeFileSync(outPath, renderFigurePng(text, figure));
  } else {
    writeFileSync(outPath, renderFigure(text, figure));
  }
}
