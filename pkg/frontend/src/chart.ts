/**
 * Figure assembly: picks the rows backing each figure type and groups them
 * into series.  Every plotted point corresponds to exactly one CSV row;
 * missing cells are never interpolated.
 */

import { BenchRow, CsvError } from "./csv.js";

export type FigureKind = "qsweep_welfare" | "qsweep_envy" | "domain_loss";

export const FIGURES: FigureKind[] = ["qsweep_welfare", "qsweep_envy", "domain_loss"];

export interface SeriesPoint {
  x: number;
  mean: number;
  stddev: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

export interface Chart {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
}

function groupByM(rows: BenchRow[], metric: string): Series[] {
  const byM = new Map<number, SeriesPoint[]>();
  for (const row of rows) {
    if (row.metric !== metric || row.q === null) continue;
    const points = byM.get(row.m) ?? [];
    if (points.some((p) => p.x === row.q)) {
      throw new CsvError(`duplicate cell m=${row.m}, q=${row.q}, metric=${metric}`);
    }
    points.push({ x: row.q, mean: row.mean, stddev: row.stddev });
    byM.set(row.m, points);
  }
  return [...byM.keys()]
    .sort((a, b) => a - b)
    .map((m) => ({
      label: `m=${m}`,
      points: byM.get(m)!.sort((a, b) => a.x - b.x),
    }));
}

export function buildChart(rows: BenchRow[], figure: FigureKind): Chart {
  let chart: Chart;
  if (figure === "qsweep_welfare" || figure === "qsweep_envy") {
    const metric = figure === "qsweep_welfare" ? "welfare_loss_abs" : "drop";
    chart = {
      title: figure === "qsweep_welfare" ? "welfare loss vs q" : "measure drop vs q",
      xLabel: "q",
      yLabel: metric,
      series: groupByM(rows, metric),
    };
  } else {
    const points: SeriesPoint[] = [];
    for (const row of rows) {
      if (row.metric !== "welfare_loss_abs" || row.q !== null) continue;
      if (points.some((p) => p.x === row.m)) {
        throw new CsvError(`duplicate cell m=${row.m}, metric=welfare_loss_abs`);
      }
      points.push({ x: row.m, mean: row.mean, stddev: row.stddev });
    }
    points.sort((a, b) => a.x - b.x);
    chart = {
      title: "welfare loss of the minimum-envy allocation",
      xLabel: "m",
      yLabel: "welfare_loss_abs",
      series: [{ label: "welfare loss", points }],
    };
  }
  if (chart.series.length === 0 || chart.series.every((s) => s.points.length === 0)) {
    throw new CsvError(`no rows back the ${figure} figure`);
  }
  return chart;
}

export interface Scale {
  min: number;
  max: number;
  toPixel(value: number): number;
}

export function linearScale(min: number, max: number, pixelFrom: number, pixelTo: number): Scale {
  const span = max - min || 1;
  return {
    min,
    max,
    toPixel: (value: number) => pixelFrom + ((value - min) / span) * (pixelTo - pixelFrom),
  };
}

/** Distinct x values across all series, ascending: these become the x ticks. */
export function xTickValues(chart: Chart): number[] {
  const values = new Set<number>();
  for (const series of chart.series) for (const p of series.points) values.add(p.x);
  return [...values].sort((a, b) => a - b);
}

export function yExtent(chart: Chart): [number, number] {
  let lo = 0;
  let hi = 0;
  for (const series of chart.series) {
    for (const p of series.points) {
      lo = Math.min(lo, p.mean - p.stddev);
      hi = Math.max(hi, p.mean + p.stddev);
    }
  }
  if (hi === lo) hi = lo + 1;
  return [lo, hi];
}
