import * as path from "node:path";

import { expect, test } from "vitest";

import { LoadedModel, loadCheckpoint } from "../src/checkpoint";
import { logSumExp } from "../src/entropy";
import { ValidationError } from "../src/errors";
import { FILE_NORM_TOL } from "../src/fulldist";
import { extractPositions } from "../src/extract";

const CHECKPOINT = path.join(__dirname, "..", "models", "tiny.json");

let cached: LoadedModel | undefined;
function tiny(): LoadedModel {
  if (!cached) cached = loadCheckpoint(CHECKPOINT);
  return cached;
}

test("per-text extraction emits one record per subword with word coordinates", () => {
  const model = tiny();
  const records = extractPositions(model, ["the cat", "a dog"], { kind: "per-text" });
  const coords = records.map((r) => [r.textId, r.wordIndex, r.subwordIndex]);
  expect(coords).toEqual([
    [0, 0, 0],
    [0, 0, 1],
    [0, 0, 2],
    [0, 1, 0],
    [0, 1, 1],
    [0, 1, 2],
    [1, 0, 0],
    [1, 1, 0],
    [1, 1, 1],
    [1, 1, 2],
  ]);
  // Mid-word positions are dumped, not skipped.
  expect(records.some((r) => r.subwordIndex > 0)).toBe(true);
  const spelled = records
    .filter((r) => r.textId === 0)
    .map((r) => model.vocab.surface(r.realizedId))
    .join("");
  expect(spelled).toBe("thecat");
});

test("every stored vector satisfies the file normalization tolerance", () => {
  const records = extractPositions(tiny(), ["the reader held the old book"], {
    kind: "per-text",
  });
  for (const rec of records) {
    expect(Math.abs(logSumExp(rec.logProbs))).toBeLessThanOrEqual(FILE_NORM_TOL);
  }
});

test("texts sharing a prefix share the start-of-text distribution", () => {
  const records = extractPositions(tiny(), ["the cat", "the dog"], { kind: "per-text" });
  const first = records.filter((r) => r.wordIndex === 0 && r.subwordIndex === 0);
  expect(first).toHaveLength(2);
  expect(first[0].logProbs).toEqual(first[1].logProbs);
});

test("a sliding window at least as long as the text matches per-text output", () => {
  const model = tiny();
  const text = "rain fell on the street";
  const perText = extractPositions(model, [text], { kind: "per-text" });
  const sliding = extractPositions(model, [text], { kind: "sliding", window: 64 });
  expect(sliding).toHaveLength(perText.length);
  for (let i = 0; i < perText.length; i++) {
    expect(sliding[i].logProbs).toEqual(perText[i].logProbs);
  }
});

test("sliding windows advance by half their length and keep half-window context", () => {
  const model = tiny();
  const text = "abc def ghi jkl mno pqr stu vwx yza bcd efg hij";
  const L = 8;
  const h = L / 2;
  const records = extractPositions(model, [text], { kind: "sliding", window: L });
  const ids = records.map((r) => r.realizedId);
  expect(records.length).toBe(36);
  // Positions before L use the start symbol plus the full preceding prefix.
  const full = model.model.logProbs([model.vocab.eosId, ...ids.slice(0, L)]);
  for (let j = 0; j < L; j++) {
    expect(records[j].logProbs).toEqual(Float32Array.from(full[j]));
  }
  // Later positions are conditioned on exactly the documented window prefix.
  for (const j of [L, L + 1, 17, 26, 35]) {
    const start = (Math.floor(j / h) - 1) * h;
    expect(j - start).toBeGreaterThanOrEqual(L - h);
    expect(j - start).toBeLessThanOrEqual(L);
    const outs = model.model.logProbs(ids.slice(start, j));
    expect(records[j].logProbs).toEqual(Float32Array.from(outs[outs.length - 1]));
  }
});

test("texts longer than the model context need a sliding window", () => {
  const model = tiny();
  const words = new Array(32).fill("abcd");
  const text = words.join(" ");
  expect(() => extractPositions(model, [text], { kind: "per-text" })).toThrowError(/sliding/);
  const records = extractPositions(model, [text], { kind: "sliding", window: 16 });
  expect(records.length).toBe(128);
  for (const rec of records) {
    expect(Math.abs(logSumExp(rec.logProbs))).toBeLessThanOrEqual(FILE_NORM_TOL);
  }
});

test("degenerate sliding windows are rejected", () => {
  const model = tiny();
  expect(() => extractPositions(model, ["abc"], { kind: "sliding", window: 1 })).toThrowError(
    ValidationError
  );
  expect(() =>
    extractPositions(model, ["abc"], { kind: "sliding", window: model.model.config.maxLen })
  ).toThrowError(/context/);
});

test("texts without words are rejected", () => {
  expect(() => extractPositions(tiny(), [""], { kind: "per-text" })).toThrowError(/no words/);
});
