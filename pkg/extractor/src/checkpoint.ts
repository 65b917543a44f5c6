/**
 * Checkpoint loading.
 *
 * A checkpoint is a JSON document holding the model shape, the subword
 * vocabulary with its marker and EOS conventions, and every weight tensor
 * as base64-encoded little-endian float32 bytes.  Weights are promoted to
 * float64 once at load time.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { ValidationError } from "./errors";
import { CausalModel, ModelConfig, ModelWeights } from "./model";
import { Vocabulary } from "./vocab";

export const CHECKPOINT_FORMAT = "tiny-causal-lm-v1";

export interface LoadedModel {
  name: string;
  model: CausalModel;
  vocab: Vocabulary;
}

function decodeTensor(name: string, encoded: unknown, expected: number): Float64Array {
  if (typeof encoded !== "string") {
    throw new ValidationError(`checkpoint weight ${name} is not a base64 string`);
  }
  const bytes = Buffer.from(encoded, "base64");
  if (bytes.length !== expected * 4) {
    throw new ValidationError(
      `checkpoint weight ${name} holds ${bytes.length / 4} floats, expected ${expected}`
    );
  }
  const out = new Float64Array(expected);
  for (let i = 0; i < expected; i++) out[i] = bytes.readFloatLE(i * 4);
  return out;
}

function requireNumber(doc: Record<string, unknown>, key: string): number {
  const value = doc[key];
  if (typeof value !== "number" || !Number.isInteger(value) || value <= 0) {
    throw new ValidationError(`checkpoint config ${key} must be a positive integer`);
  }
  return value;
}

export function loadCheckpoint(checkpointPath: string): LoadedModel {
  let raw: string;
  try {
    raw = fs.readFileSync(checkpointPath, "utf8");
  } catch (err) {
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      throw new ValidationError(`no model checkpoint at ${checkpointPath}`);
    }
    throw err;
  }
  let doc: Record<string, unknown>;
  try {
    doc = JSON.parse(raw);
  } catch (err) {
    throw new ValidationError(`${checkpointPath}: not valid JSON (${(err as Error).message})`);
  }
  if (doc["format"] !== CHECKPOINT_FORMAT) {
    throw new ValidationError(`${checkpointPath}: unknown checkpoint format ${doc["format"]}`);
  }
  const name = typeof doc["name"] === "string" ? (doc["name"] as string) : "unnamed";
  const configDoc = doc["config"];
  if (typeof configDoc !== "object" || configDoc === null) {
    throw new ValidationError(`${checkpointPath}: missing config`);
  }
  const config: ModelConfig = {
    dModel: requireNumber(configDoc as Record<string, unknown>, "d_model"),
    nHeads: requireNumber(configDoc as Record<string, unknown>, "n_heads"),
    dFF: requireNumber(configDoc as Record<string, unknown>, "d_ff"),
    maxLen: requireNumber(configDoc as Record<string, unknown>, "max_len"),
  };
  if (config.dModel % config.nHeads !== 0) {
    throw new ValidationError(`${checkpointPath}: d_model not divisible by n_heads`);
  }

  const tokens = doc["vocabulary"];
  if (!Array.isArray(tokens) || tokens.some((t) => typeof t !== "string")) {
    throw new ValidationError(`${checkpointPath}: vocabulary must be a list of strings`);
  }
  const marker = doc["word_initial_marker"];
  const eosToken = doc["eos_token"];
  if (typeof marker !== "string" || marker.length === 0) {
    throw new ValidationError(`${checkpointPath}: missing word_initial_marker`);
  }
  if (typeof eosToken !== "string") {
    throw new ValidationError(`${checkpointPath}: missing eos_token`);
  }
  const eosId = (tokens as string[]).indexOf(eosToken);
  if (eosId < 0) {
    throw new ValidationError(`${checkpointPath}: eos_token ${eosToken} not in vocabulary`);
  }
  const vocab = new Vocabulary(tokens as string[], eosId, marker);

  const weightsDoc = doc["weights"];
  if (typeof weightsDoc !== "object" || weightsDoc === null) {
    throw new ValidationError(`${checkpointPath}: missing weights`);
  }
  const tensors = weightsDoc as Record<string, unknown>;
  const { dModel, dFF, maxLen } = config;
  const V = vocab.size;
  const shapes: [keyof ModelWeights, string, number][] = [
    ["tokEmbedding", "tok_embedding", V * dModel],
    ["posEmbedding", "pos_embedding", maxLen * dModel],
    ["ln1Gain", "ln1_gain", dModel],
    ["ln1Bias", "ln1_bias", dModel],
    ["attnQ", "attn_q", dModel * dModel],
    ["attnQBias", "attn_q_bias", dModel],
    ["attnK", "attn_k", dModel * dModel],
    ["attnKBias", "attn_k_bias", dModel],
    ["attnV", "attn_v", dModel * dModel],
    ["attnVBias", "attn_v_bias", dModel],
    ["attnOut", "attn_out", dModel * dModel],
    ["attnOutBias", "attn_out_bias", dModel],
    ["ln2Gain", "ln2_gain", dModel],
    ["ln2Bias", "ln2_bias", dModel],
    ["mlpIn", "mlp_in", dModel * dFF],
    ["mlpInBias", "mlp_in_bias", dFF],
    ["mlpOut", "mlp_out", dFF * dModel],
    ["mlpOutBias", "mlp_out_bias", dModel],
    ["lnFGain", "lnf_gain", dModel],
    ["lnFBias", "lnf_bias", dModel],
  ];
  const weights = {} as ModelWeights;
  for (const [field, key, size] of shapes) {
    weights[field] = decodeTensor(key, tensors[key], size);
  }
  return { name, model: new CausalModel(config, weights, V), vocab };
}

/** Resolve a model name to a checkpoint path in the package models/ directory. */
export function resolveModelPath(nameOrPath: string, baseDir: string): string {
  if (nameOrPath.endsWith(".json")) return path.resolve(nameOrPath);
  return path.join(baseDir, `${nameOrPath}.json`);
}
