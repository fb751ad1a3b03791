/**
 * Strict reader for the bench result schema:
 * `m,q,metric,mean,stddev,instances,seed` (q is empty on domain-sweep rows).
 * Any deviation (wrong header, missing column, non-numeric field) throws.
 */

export interface BenchRow {
  m: number;
  q: number | null;
  metric: string;
  mean: number;
  stddev: number;
  instances: number;
  seed: number;
}

export const HEADER = ["m", "q", "metric", "mean", "stddev", "instances", "seed"];

export class CsvError extends Error {}

function parseIntStrict(text: string, where: string): number {
  if (!/^-?\d+$/.test(text)) throw new CsvError(`${where}: expected an integer, got ${JSON.stringify(text)}`);
  return parseInt(text, 10);
}

function parseFloatStrict(text: string, where: string): number {
  const value = Number(text);
  if (text.trim() === "" || Number.isNaN(value)) {
    throw new CsvError(`${where}: expected a number, got ${JSON.stringify(text)}`);
  }
  return value;
}

/** Parse the CSV text; rejects empty bodies so no figure is rendered from nothing. */
export function parseBenchCsv(text: string): BenchRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) throw new CsvError("empty file");
  const header = lines[0].split(",");
  if (header.length !== HEADER.length || !HEADER.every((h, i) => header[i] === h)) {
    throw new CsvError(`bad header ${JSON.stringify(lines[0])}; expected ${HEADER.join(",")}`);
  }
  if (lines.length === 1) throw new CsvError("no data rows");
  const rows: BenchRow[] = [];
  for (let lineNo = 1; lineNo < lines.length; lineNo++) {
    const parts = lines[lineNo].split(",");
    if (parts.length !== HEADER.length) {
      throw new CsvError(`row ${lineNo + 1}: expected ${HEADER.length} fields, got ${parts.length}`);
    }
    const where = `row ${lineNo + 1}`;
    rows.push({
      m: parseIntStrict(parts[0], where),
      q: parts[1] === "" ? null : parseIntStrict(parts[1], where),
      metric: parts[2],
      mean: parseFloatStrict(parts[3], where),
      stddev: parseFloatStrict(parts[4], where),
      instances: parseIntStrict(parts[5], where),
      seed: parseIntStrict(parts[6], where),
    });
  }
  return rows;
}
