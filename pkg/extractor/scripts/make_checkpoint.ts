/**
 * Generates the bundled model checkpoint, models/tiny.json.
 *
 * The checkpoint is fully determined by the seed below: weights come from a
 * mulberry32 stream fed through a Box-Muller transform, so rerunning this
 * script reproduces the committed file byte for byte.  The vocabulary is
 * the 26 word-initial letters, the 26 continuation letters, and EOS.
 */

import * as fs from "node:fs";
import * as path from "node:path";

const SEED = 20260823;
const D_MODEL = 32;
const N_HEADS = 2;
const D_FF = 64;
const MAX_LEN = 128;
const MARKER = "▁";
const EOS = "</s>";

function mulberry32(seed: number): () => number {
  let a = seed | 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussian(uniform: () => number): number {
  const u1 = Math.max(uniform(), 1e-12);
  const u2 = uniform();
  return Math.sqrt(-2 * Math.log(u1)) * Math.cos(2 * Math.PI * u2);
}

function tensor(uniform: () => number, size: number, scale: number): Float32Array {
  const out = new Float32Array(size);
  for (let i = 0; i < size; i++) out[i] = Math.fround(scale * gaussian(uniform));
  return out;
}

function constant(size: number, value: number): Float32Array {
  return new Float32Array(size).fill(value);
}

function encode(values: Float32Array): string {
  return Buffer.from(values.buffer, values.byteOffset, values.byteLength).toString("base64");
}

function buildVocabulary(): string[] {
  const letters = "abcdefghijklmnopqrstuvwxyz".split("");
  return [...letters.map((c) => MARKER + c), ...letters, EOS];
}

function main(): void {
  const rng = mulberry32(SEED);
  const vocabulary = buildVocabulary();
  const V = vocabulary.length;

  // Embedding scale sets the logit spread under the tied unembedding; 0.25
  // gives next-token entropies a bit under the uniform bound with visible
  // variation across contexts.
  const weights: Record<string, Float32Array> = {
    tok_embedding: tensor(rng, V * D_MODEL, 0.25),
    pos_embedding: tensor(rng, MAX_LEN * D_MODEL, 0.15),
    ln1_gain: constant(D_MODEL, 1),
    ln1_bias: constant(D_MODEL, 0),
    attn_q: tensor(rng, D_MODEL * D_MODEL, 0.2),
    attn_q_bias: constant(D_MODEL, 0),
    attn_k: tensor(rng, D_MODEL * D_MODEL, 0.2),
    attn_k_bias: constant(D_MODEL, 0),
    attn_v: tensor(rng, D_MODEL * D_MODEL, 0.2),
    attn_v_bias: constant(D_MODEL, 0),
    attn_out: tensor(rng, D_MODEL * D_MODEL, 0.14),
    attn_out_bias: constant(D_MODEL, 0),
    ln2_gain: constant(D_MODEL, 1),
    ln2_bias: constant(D_MODEL, 0),
    mlp_in: tensor(rng, D_MODEL * D_FF, 0.2),
    mlp_in_bias: constant(D_FF, 0),
    mlp_out: tensor(rng, D_FF * D_MODEL, 0.14),
    mlp_out_bias: constant(D_MODEL, 0),
    lnf_gain: constant(D_MODEL, 1),
    lnf_bias: constant(D_MODEL, 0),
  };

  const doc = {
    format: "tiny-causal-lm-v1",
    name: "tiny",
    seed: SEED,
    config: { d_model: D_MODEL, n_heads: N_HEADS, d_ff: D_FF, max_len: MAX_LEN },
    vocabulary,
    word_initial_marker: MARKER,
    eos_token: EOS,
    weights: Object.fromEntries(Object.entries(weights).map(([k, v]) => [k, encode(v)])),
  };
  const outPath = path.join(__dirname, "..", "models", "tiny.json");
  fs.writeFileSync(outPath, JSON.stringify(doc, null, 1) + "\n", "utf8");
  console.log(`wrote ${outPath} (vocab ${V}, seed ${SEED})`);
}

main();
