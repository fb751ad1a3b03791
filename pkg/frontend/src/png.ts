/**
 * Dependency-free PNG renderer for the preview flag.
 *
 * Draws the same chart geometry as the SVG (axes, stddev bands, lines,
 * points, legend swatches) onto an RGBA buffer and encodes it as one
 * 8-bit RGBA IDAT chunk via node's zlib.  Labels use a tiny built-in
 * glyph set (digits, '.', '-', '=', 'm', 'q'); other characters are
 * skipped, so the SVG remains the canonical labelled output.
 */

import { deflateSync } from "node:zlib";

import { Chart, linearScale, xTickValues, yExtent } from "./chart.js";
import { PALETTE, WIDTH, HEIGHT } from "./svg.js";

type Rgb = [number, number, number];

const GLYPHS: Record<string, number[]> = {
  "0": [0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e],
  "1": [0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e],
  "2": [0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f],
  "3": [0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e],
  "4": [0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02],
  "5": [0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e],
  "6": [0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e],
  "7": [0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
  "8": [0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e],
  "9": [0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c],
  ".": [0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c],
  "-": [0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00],
  "=": [0x00, 0x00, 0x1f, 0x00, 0x1f, 0x00, 0x00],
  m: [0x00, 0x00, 0x1a, 0x15, 0x15, 0x15, 0x15],
  q: [0x00, 0x00, 0x0d, 0x13, 0x0f, 0x01, 0x01],
};

class Raster {
  data: Uint8Array;

  constructor(readonly width: number, readonly height: number) {
    this.data = new Uint8Array(width * height * 4).fill(255);
  }

  set(x: number, y: number, [r, g, b]: Rgb, alpha = 1) {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const at = (y * this.width + x) * 4;
    this.data[at] = Math.round(this.data[at] * (1 - alpha) + r * alpha);
    this.data[at + 1] = Math.round(this.data[at + 1] * (1 - alpha) + g * alpha);
    this.data[at + 2] = Math.round(this.data[at + 2] * (1 - alpha) + b * alpha);
    this.data[at + 3] = 255;
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Rgb) {
    let ax = Math.round(x0);
    let ay = Math.round(y0);
    const bx = Math.round(x1);
    const by = Math.round(y1);
    const dx = Math.abs(bx - ax);
    const dy = -Math.abs(by - ay);
    const sx = ax < bx ? 1 : -1;
    const sy = ay < by ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(ax, ay, color);
      if (ax === bx && ay === by) break;
      const doubled = 2 * err;
      if (doubled >= dy) {
        err += dy;
        ax += sx;
      }
      if (doubled <= dx) {
        err += dx;
        ay += sy;
      }
    }
  }

  vspan(x: number, yFrom: number, yTo: number, color: Rgb, alpha: number) {
    const top = Math.round(Math.min(yFrom, yTo));
    const bottom = Math.round(Math.max(yFrom, yTo));
    for (let y = top; y <= bottom; y++) this.set(x, y, color, alpha);
  }

  rect(x: number, y: number, w: number, h: number, color: Rgb) {
    for (let yy = y; yy < y + h; yy++) for (let xx = x; xx < x + w; xx++) this.set(xx, yy, color);
  }

  disc(cx: number, cy: number, radius: number, color: Rgb) {
    for (let y = -radius; y <= radius; y++)
      for (let x = -radius; x <= radius; x++)
        if (x * x + y * y <= radius * radius) this.set(cx + x, cy + y, color);
  }

  text(x: number, y: number, content: string, color: Rgb) {
    let cursor = Math.round(x);
    for (const ch of content) {
      const glyph = GLYPHS[ch];
      if (glyph) {
        for (let row = 0; row < 7; row++)
          for (let col = 0; col < 5; col++)
            if (glyph[row] & (1 << (4 - col))) this.set(cursor + col, y + row, color);
      }
      cursor += 6;
    }
  }
}

function hexColor(color: string): Rgb {
  return [
    parseInt(color.slice(1, 3), 16),
    parseInt(color.slice(3, 5), 16),
    parseInt(color.slice(5, 7), 16),
  ];
}

const BLACK: Rgb = [34, 34, 34];

export function renderPng(chart: Chart): Buffer {
  const raster = new Raster(WIDTH, HEIGHT);
  const plotLeft = 64;
  const plotRight = WIDTH - 150;
  const plotTop = 40;
  const plotBottom = HEIGHT - 48;
  const ticks = xTickValues(chart);
  const [yLo, yHi] = yExtent(chart);
  const xScale = linearScale(ticks[0], ticks[ticks.length - 1], plotLeft, plotRight);
  const yScale = linearScale(yLo, yHi, plotBottom, plotTop);

  raster.line(plotLeft, plotBottom, plotRight, plotBottom, BLACK);
  raster.line(plotLeft, plotTop, plotLeft, plotBottom, BLACK);
  for (const tick of ticks) {
    const x = xScale.toPixel(tick);
    raster.line(x, plotBottom, x, plotBottom + 5, BLACK);
    const label = String(tick);
    raster.text(x - (label.length * 6) / 2, plotBottom + 8, label, BLACK);
  }
  raster.text((plotLeft + plotRight) / 2, HEIGHT - 14, chart.xLabel, BLACK);
  chart.series.forEach((series, index) => {
    const color = hexColor(PALETTE[index % PALETTE.length]);
    for (let z = 0; z + 1 < series.points.length; z++) {
      const a = series.points[z];
      const b = series.points[z + 1];
      const xa = xScale.toPixel(a.x);
      const xb = xScale.toPixel(b.x);
      for (let x = Math.ceil(xa); x <= Math.floor(xb); x++) {
        const t = xb === xa ? 0 : (x - xa) / (xb - xa);
        const hi = yScale.toPixel(a.mean + a.stddev + t * (b.mean + b.stddev - a.mean - a.stddev));
        const lo = yScale.toPixel(a.mean - a.stddev + t * (b.mean - b.stddev - a.mean + a.stddev));
        raster.vspan(x, hi, lo, color, 0.15);
      }
    }
    for (let z = 0; z + 1 < series.points.length; z++) {
      const a = series.points[z];
      const b = series.points[z + 1];
      raster.line(
        xScale.toPixel(a.x),
        yScale.toPixel(a.mean),
        xScale.toPixel(b.x),
        yScale.toPixel(b.mean),
        color
      );
    }
    for (const p of series.points) raster.disc(xScale.toPixel(p.x), yScale.toPixel(p.mean), 2, color);
    raster.rect(plotRight + 12, plotTop + 14 * index - 8, 10, 10, color);
    raster.text(plotRight + 27, plotTop + 14 * index - 7, series.label, BLACK);
  });
  return encodePng(raster);
}

// --- PNG container ----------------------------------------------------------

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let k = 0; k < 256; k++) {
    let c = k;
    for (let bit = 0; bit < 8; bit++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[k] = c >>> 0;
  }
  return table;
})();

function crc32(data: Buffer): number {
  let crc = 0xffffffff;
  for (const byte of data) crc = CRC_TABLE[(crc ^ byte) & 0xff] ^ (crc >>> 8);
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Buffer): Buffer {
  const head = Buffer.alloc(4);
  head.writeUInt32BE(payload.length);
  const body = Buffer.concat([Buffer.from(type, "ascii"), payload]);
  const tail = Buffer.alloc(4);
  tail.writeUInt32BE(crc32(body));
  return Buffer.concat([head, body, tail]);
}

function encodePng(raster: Raster): Buffer {
  const { width, height, data } = raster;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  const raw = Buffer.alloc(height * (1 + width * 4));
  for (let y = 0; y < height; y++) {
    const rowStart = y * (1 + width * 4);
    raw[rowStart] = 0; // filter: none
    raw.set(data.subarray(y * width * 4, (y + 1) * width * 4), rowStart + 1);
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw, { level: 9 })),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}
