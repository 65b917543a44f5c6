import * as path from "node:path";

import { expect, test } from "vitest";

import { loadCheckpoint } from "../src/checkpoint";
import { logSumExp } from "../src/entropy";

const CHECKPOINT = path.join(__dirname, "..", "models", "tiny.json");

test("checkpoint loads with the documented shape", () => {
  const { model, vocab } = loadCheckpoint(CHECKPOINT);
  expect(vocab.size).toBe(53);
  expect(vocab.eosId).toBe(52);
  expect(vocab.tokens[vocab.eosId]).toBe("</s>");
  expect(model.config.dModel % model.config.nHeads).toBe(0);
  expect(model.vocabSize).toBe(vocab.size);
});

test("every output vector is a normalized log distribution", () => {
  const { model, vocab } = loadCheckpoint(CHECKPOINT);
  const ids = [vocab.eosId, 0, 30, 7, 44, 4];
  const outs = model.logProbs(ids);
  expect(outs).toHaveLength(ids.length);
  for (const lp of outs) {
    expect(lp).toHaveLength(vocab.size);
    expect(Math.abs(logSumExp(lp))).toBeLessThan(1e-12);
  }
});

test("distributions are causal: a changed suffix leaves earlier outputs untouched", () => {
  const { model } = loadCheckpoint(CHECKPOINT);
  const a = model.logProbs([52, 5, 3, 7, 2]);
  const b = model.logProbs([52, 5, 3, 9, 1]);
  // Output t depends on inputs 0..t only, so the first three outputs agree.
  expect(a[0]).toEqual(b[0]);
  expect(a[1]).toEqual(b[1]);
  expect(a[2]).toEqual(b[2]);
  expect(a[3]).not.toEqual(b[3]);
});

test("repeated forward passes are bit-identical", () => {
  const { model } = loadCheckpoint(CHECKPOINT);
  const ids = [52, 19, 7, 4, 28, 0, 45];
  const a = model.logProbs(ids);
  const b = model.logProbs(ids);
  for (let t = 0; t < ids.length; t++) expect(a[t]).toEqual(b[t]);
});

test("inputs beyond the context window are rejected", () => {
  const { model } = loadCheckpoint(CHECKPOINT);
  const ids = new Array(model.config.maxLen + 1).fill(0);
  expect(() => model.logProbs(ids)).toThrowError(/context/);
});

test("dissimilar contexts give dissimilar next-token distributions", () => {
  const { model } = loadCheckpoint(CHECKPOINT);
  const a = model.logProbs([52, 0, 27, 46])[3];
  const b = model.logProbs([52, 19, 33, 30])[3];
  let maxGap = 0;
  for (let v = 0; v < a.length; v++) maxGap = Math.max(maxGap, Math.abs(a[v] - b[v]));
  expect(maxGap).toBeGreaterThan(1e-3);
});
