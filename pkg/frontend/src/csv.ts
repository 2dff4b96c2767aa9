/**
 * Strict reader for regret summary CSVs.
 *
 * The producer writes exactly three columns — `round,mean_regret,half_width_95`
 * — as plain decimal numbers with no quoting, one checkpoint per row, rounds
 * strictly increasing. Anything else is a malformed input and the error says
 * which file, line, and column broke the contract.
 */

import { readFileSync } from "node:fs";

export const EXPECTED_HEADER = ["round", "mean_regret", "half_width_95"] as const;

export interface RegretSummary {
  /** Path the summary was read from (used in error messages and labels). */
  file: string;
  /** Checkpoint rounds, strictly increasing, each >= 1. */
  rounds: number[];
  /** Mean cumulative regret at each checkpoint. */
  meanRegret: number[];
  /** 95% confidence half-width at each checkpoint, each >= 0. */
  halfWidth: number[];
}

export class CsvFormatError extends Error {
  constructor(
    readonly file: string,
    message: string,
  ) {
    super(`${file}: ${message}`);
    this.name = "CsvFormatError";
  }
}

function parseNumber(
  file: string,
  raw: string,
  line: number,
  column: (typeof EXPECTED_HEADER)[number],
): number {
  const value = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(value)) {
    throw new CsvFormatError(
      file,
      `line ${line}: column '${column}' is not a finite number (got ${JSON.stringify(raw)})`,
    );
  }
  return value;
}

/** Parse summary CSV text. `file` names the source in errors. */
export function parseSummary(file: string, text: string): RegretSummary {
  const lines = text.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new CsvFormatError(file, "file is empty");
  }

  const header = (lines[0] ?? "").split(",");
  for (const column of EXPECTED_HEADER) {
    if (!header.includes(column)) {
      throw new CsvFormatError(
        file,
        `header is missing column '${column}' (got ${JSON.stringify(lines[0])})`,
      );
    }
  }
  if (header.length !== EXPECTED_HEADER.length) {
    throw new CsvFormatError(
      file,
      `expected exactly ${EXPECTED_HEADER.length} columns ${EXPECTED_HEADER.join(",")}, ` +
        `got ${header.length}`,
    );
  }
  if (lines.length === 1) {
    throw new CsvFormatError(file, "no data rows after the header");
  }

  const summary: RegretSummary = { file, rounds: [], meanRegret: [], halfWidth: [] };
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const fields = (lines[i] ?? "").split(",");
    if (fields.length !== EXPECTED_HEADER.length) {
      throw new CsvFormatError(
        file,
        `line ${lineNo}: expected ${EXPECTED_HEADER.length} fields, got ${fields.length}`,
      );
    }
    const round = parseNumber(file, fields[0]!, lineNo, "round");
    const mean = parseNumber(file, fields[1]!, lineNo, "mean_regret");
    const halfWidth = parseNumber(file, fields[2]!, lineNo, "half_width_95");
    if (!Number.isInteger(round) || round < 1) {
      throw new CsvFormatError(
        file,
        `line ${lineNo}: column 'round' must be a positive integer, got ${fields[0]}`,
      );
    }
    const previous = summary.rounds[summary.rounds.length - 1];
    if (previous !== undefined && round <= previous) {
      throw new CsvFormatError(
        file,
        `line ${lineNo}: column 'round' must be strictly increasing ` +
          `(${round} after ${previous})`,
      );
    }
    if (halfWidth < 0) {
      throw new CsvFormatError(
        file,
        `line ${lineNo}: column 'half_width_95' must be >= 0, got ${fields[2]}`,
      );
    }
    summary.rounds.push(round);
    summary.meanRegret.push(mean);
    summary.halfWidth.push(halfWidth);
  }
  return summary;
}

/** Read and parse a summary CSV from disk. */
export function readSummary(file: string): RegretSummary {
  let text: string;
  try {
    text = readFileSync(file, "utf8");
  } catch (error) {
    const reason = error instanceof Error ? error.message : String(error);
    throw new CsvFormatError(file, `cannot read file: ${reason}`);
  }
  return parseSummary(file, text);
}
