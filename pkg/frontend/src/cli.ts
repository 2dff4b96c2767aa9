#!/usr/bin/env node
/**
 * Command-line figure renderer.
 *
 *   umabsim-plot plot --out fig.svg results/line17__uts.csv:UTS \
 *                                   results/line17__ts.csv:TS [...]
 *
 * Each positional is a summary CSV path with an optional :LABEL suffix;
 * without one the label is the file name minus its extension. Flags:
 * --log-x for a logarithmic round axis, --title, --width, --height.
 */

import { realpathSync } from "node:fs";
import { basename, extname } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { CsvFormatError } from "./csv.js";
import { plotRegret, type CurveInput } from "./plot.js";

export const USAGE =
  "usage: umabsim-plot plot --out FILE.svg INPUT.csv[:LABEL] [INPUT.csv[:LABEL] ...]\n" +
  "                         [--log-x] [--title TEXT] [--width PX] [--height PX]";

function curveFromArg(arg: string): CurveInput {
  const colon = arg.lastIndexOf(":");
  if (colon > 0 && colon > arg.lastIndexOf("/")) {
    return { path: arg.slice(0, colon), label: arg.slice(colon + 1) };
  }
  return { path: arg, label: basename(arg, extname(arg)) };
}

function positiveInt(name: string, raw: string): number {
  const value = Number(raw);
  if (!Number.isInteger(value) || value <= 0) {
    throw new UsageError(`--${name} must be a positive integer, got ${raw}`);
  }
  return value;
}

class UsageError extends Error {}

/** Run the CLI; returns the process exit code. */
export function main(argv: string[]): number {
  try {
    const { values, positionals } = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string" },
        "log-x": { type: "boolean", default: false },
        title: { type: "string" },
        width: { type: "string" },
        height: { type: "string" },
        help: { type: "boolean", short: "h", default: false },
      },
    });
    if (values.help) {
      console.log(USAGE);
      return 0;
    }
    const [command, ...inputArgs] = positionals;
    if (command !== "plot") {
      throw new UsageError(
        command === undefined
          ? "missing command"
          : `unknown command ${JSON.stringify(command)} (expected 'plot')`,
      );
    }
    if (values.out === undefined) {
      throw new UsageError("missing required --out");
    }
    if (inputArgs.length === 0) {
      throw new UsageError("no input CSVs given");
    }
    const output = plotRegret({
      inputs: inputArgs.map(curveFromArg),
      output: values.out,
      logX: values["log-x"],
      title: values.title,
      width: values.width === undefined ? undefined : positiveInt("width", values.width),
      height:
        values.height === undefined ? undefined : positiveInt("height", values.height),
    });
    console.log(output);
    return 0;
  } catch (error) {
    if (error instanceof UsageError) {
      console.error(`error: ${error.message}\n${USAGE}`);
      return 2;
    }
    if (error instanceof CsvFormatError || error instanceof Error) {
      console.error(`error: ${error.message}`);
      return 1;
    }
    console.error(`error: ${String(error)}`);
    return 1;
  }
}

const entryPoint = process.argv[1];
if (
  entryPoint !== undefined &&
  import.meta.url === pathToFileURL(realpathSync(entryPoint)).href
) {
  process.exit(main(process.argv.slice(2)));
}
