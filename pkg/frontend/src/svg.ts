/**
 * Deterministic SVG rendering: plain string assembly, fixed palette, all
 * coordinates rounded to two decimals, so identical inputs give
 * byte-identical output.
 */

import { Chart, linearScale, xTickValues, yExtent } from "./chart.js";

export const WIDTH = 680;
export const HEIGHT = 440;
const MARGIN = { left: 64, right: 150, top: 40, bottom: 48 };

export const PALETTE = [
  "#1f77b4",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

function px(value: number): string {
  const rounded = value.toFixed(2);
  return rounded === "-0.00" ? "0.00" : rounded;
}

function fmt(value: number): string {
  if (Number.isInteger(value)) return String(value);
  return String(Number(value.toPrecision(4)));
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderSvg(chart: Chart): string {
  const plotLeft = MARGIN.left;
  const plotRight = WIDTH - MARGIN.right;
  const plotTop = MARGIN.top;
  const plotBottom = HEIGHT - MARGIN.bottom;
  const ticks = xTickValues(chart);
  const [yLo, yHi] = yExtent(chart);
  const xScale = linearScale(ticks[0], ticks[ticks.length - 1], plotLeft, plotRight);
  const yScale = linearScale(yLo, yHi, plotBottom, plotTop);

  const parts: string[] = [];
  parts.push('<?xml version="1.0" encoding="UTF-8"?>');
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="monospace">`
  );
  parts.push(`<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${px(plotLeft)}" y="${px(plotTop - 16)}" font-size="14" fill="#222222">${escapeXml(chart.title)}</text>`
  );
  // axes
  parts.push(
    `<line x1="${px(plotLeft)}" y1="${px(plotBottom)}" x2="${px(plotRight)}" y2="${px(plotBottom)}" stroke="#222222"/>`
  );
  parts.push(
    `<line x1="${px(plotLeft)}" y1="${px(plotTop)}" x2="${px(plotLeft)}" y2="${px(plotBottom)}" stroke="#222222"/>`
  );
  for (const tick of ticks) {
    const x = xScale.toPixel(tick);
    parts.push(
      `<g class="x-tick"><line x1="${px(x)}" y1="${px(plotBottom)}" x2="${px(x)}" y2="${px(plotBottom + 5)}" stroke="#222222"/>` +
        `<text x="${px(x)}" y="${px(plotBottom + 18)}" font-size="11" text-anchor="middle" fill="#222222">${fmt(tick)}</text></g>`
    );
  }
  const yTickCount = 5;
  for (let t = 0; t <= yTickCount; t++) {
    const value = yLo + ((yHi - yLo) * t) / yTickCount;
    const y = yScale.toPixel(value);
    parts.push(
      `<g class="y-tick"><line x1="${px(plotLeft - 5)}" y1="${px(y)}" x2="${px(plotLeft)}" y2="${px(y)}" stroke="#222222"/>` +
        `<text x="${px(plotLeft - 8)}" y="${px(y + 4)}" font-size="11" text-anchor="end" fill="#222222">${fmt(value)}</text></g>`
    );
  }
  parts.push(
    `<text x="${px((plotLeft + plotRight) / 2)}" y="${px(HEIGHT - 12)}" font-size="12" text-anchor="middle" fill="#222222">${escapeXml(chart.xLabel)}</text>`
  );
  parts.push(
    `<text x="16" y="${px((plotTop + plotBottom) / 2)}" font-size="12" fill="#222222" transform="rotate(-90 16 ${px((plotTop + plotBottom) / 2)})" text-anchor="middle">${escapeXml(chart.yLabel)}</text>`
  );
  chart.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length];
    if (series.points.length === 0) return;
    const upper = series.points.map((p) => `${px(xScale.toPixel(p.x))},${px(yScale.toPixel(p.mean + p.stddev))}`);
    const lower = [...series.points]
      .reverse()
      .map((p) => `${px(xScale.toPixel(p.x))},${px(yScale.toPixel(p.mean - p.stddev))}`);
    parts.push(
      `<polygon class="band" points="${[...upper, ...lower].join(" ")}" fill="${color}" fill-opacity="0.15" stroke="none"/>`
    );
    const line = series.points.map((p) => `${px(xScale.toPixel(p.x))},${px(yScale.toPixel(p.mean))}`);
    parts.push(
      `<polyline class="line" points="${line.join(" ")}" fill="none" stroke="${color}" stroke-width="1.5"/>`
    );
    for (const p of series.points) {
      parts.push(
        `<circle class="point" cx="${px(xScale.toPixel(p.x))}" cy="${px(yScale.toPixel(p.mean))}" r="2.5" fill="${color}"/>`
      );
    }
    const legendY = plotTop + 14 * index;
    parts.push(
      `<g class="legend"><rect x="${px(plotRight + 12)}" y="${px(legendY - 8)}" width="10" height="10" fill="${color}"/>` +
        `<text x="${px(plotRight + 27)}" y="${px(legendY + 1)}" font-size="11" fill="#222222">${escapeXml(series.label)}</text></g>`
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
