/**
 * Command line entry point.
 *
 *   extract --model <name> --texts <path> --out <path>
 *           --format fulldist | --format summary --alpha <order>...
 *           [--context per-text | sliding:<L>]
 *
 * The texts file holds one text per line; blank lines are skipped.  Exit
 * codes: 0 on success, 2 on validation errors, 1 on runtime errors.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { loadCheckpoint, resolveModelPath } from "./checkpoint";
import { parseAlpha } from "./entropy";
import { ValidationError } from "./errors";
import { ContextPolicy, OutputFormat, runExtraction } from "./extract";

const USAGE =
  "usage: extract --model <name> --texts <path> --out <path> " +
  "--format {fulldist,summary} [--alpha <order> ...] [--context per-text|sliding:<L>]";

function parseContext(text: string): ContextPolicy {
  if (text === "per-text") return { kind: "per-text" };
  const match = /^sliding:(\d+)$/.exec(text);
  if (match) {
    const window = Number(match[1]);
    if (window >= 2) return { kind: "sliding", window };
  }
  throw new ValidationError(`bad context policy ${JSON.stringify(text)}; ` +
    `expected per-text or sliding:<L> with L >= 2`);
}

function parseFormat(format: string, alphaArgs: string[] | undefined): OutputFormat {
  if (format === "fulldist") {
    if (alphaArgs && alphaArgs.length > 0) {
      throw new ValidationError("--alpha only applies to the summary format");
    }
    return { kind: "fulldist" };
  }
  if (format === "summary") {
    if (!alphaArgs || alphaArgs.length === 0) {
      throw new ValidationError("summary format requires at least one --alpha order");
    }
    const alphas: number[] = [];
    for (const text of alphaArgs) {
      let value: number;
      try {
        value = parseAlpha(text);
      } catch (err) {
        throw new ValidationError((err as Error).message);
      }
      if (alphas.includes(value)) {
        throw new ValidationError(`duplicate entropy order ${text}`);
      }
      alphas.push(value);
    }
    return { kind: "summary", alphas };
  }
  throw new ValidationError(`unknown format ${JSON.stringify(format)}; expected fulldist or summary`);
}

function readTexts(textsPath: string): string[] {
  let raw: string;
  try {
    raw = fs.readFileSync(textsPath, "utf8");
  } catch (err) {
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      throw new ValidationError(`texts file not found: ${textsPath}`);
    }
    throw err;
  }
  const texts = raw
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (texts.length === 0) {
    throw new ValidationError(`texts file ${textsPath} holds no non-blank lines`);
  }
  return texts;
}

/**
 * Let --alpha take a space-separated list (--alpha 0.5 1 inf) by re-tagging
 * the bare values that follow it as repeated --alpha occurrences.
 */
function expandAlphaLists(argv: string[]): string[] {
  const out: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    out.push(argv[i]);
    if (argv[i] === "--alpha" && i + 1 < argv.length) {
      out.push(argv[++i]);
      while (i + 1 < argv.length && !argv[i + 1].startsWith("-")) {
        out.push("--alpha", argv[++i]);
      }
    }
  }
  return out;
}

function run(argv: string[]): void {
  let parsed;
  try {
    parsed = parseArgs({
      args: expandAlphaLists(argv),
      allowPositionals: true,
      options: {
        model: { type: "string" },
        texts: { type: "string" },
        out: { type: "string" },
        format: { type: "string" },
        alpha: { type: "string", multiple: true },
        context: { type: "string", default: "per-text" },
      },
    });
  } catch (err) {
    throw new ValidationError(`${(err as Error).message}\n${USAGE}`);
  }
  const { values, positionals } = parsed;
  if (positionals.length !== 1 || positionals[0] !== "extract") {
    throw new ValidationError(USAGE);
  }
  for (const key of ["model", "texts", "out", "format"] as const) {
    if (!values[key]) throw new ValidationError(`missing --${key}\n${USAGE}`);
  }
  const format = parseFormat(values.format as string, values.alpha);
  const policy = parseContext(values.context as string);

  const modelsDir = path.join(__dirname, "..", "models");
  const model = loadCheckpoint(resolveModelPath(values.model as string, modelsDir));
  const result = runExtraction(model, {
    modelName: values.model as string,
    texts: readTexts(values.texts as string),
    contextPolicy: policy,
    format,
    outPath: values.out as string,
  });
  for (const file of result.files) {
    console.log(`wrote ${file} (${result.positions} positions, vocab ${model.vocab.size})`);
  }
}

function main(): void {
  try {
    run(process.argv.slice(2));
  } catch (err) {
    if (err instanceof ValidationError) {
      console.error(`error: ${err.message}`);
      process.exit(2);
    }
    console.error(`runtime error: ${(err as Error).stack ?? err}`);
    process.exit(1);
  }
}

main();
