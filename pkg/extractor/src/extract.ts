/**
 * Extraction jobs: run every text through the model and dump one record per
 * subword position, including mid-word positions.
 *
 * Context policies:
 *   per-text     each text is conditioned on its own prefix only, with the
 *                EOS token prepended as the start symbol;
 *   sliding:L    strided evaluation for texts longer than the model context.
 *                The first window (with start symbol) predicts positions
 *                0..L-1; each later window starts L/2 subwords further on,
 *                conditions on the raw in-window prefix, and contributes its
 *                trailing half, so every position keeps at least L/2 context.
 */

import { ValidationError } from "./errors";
import { logSumExp } from "./entropy";
import { FILE_NORM_TOL, Manifest, PositionRecord, writeFulldist } from "./fulldist";
import { LoadedModel } from "./checkpoint";
import { writeSummary } from "./summary";
import { tokenizeText } from "./vocab";

export type ContextPolicy = { kind: "per-text" } | { kind: "sliding"; window: number };

export type OutputFormat = { kind: "fulldist" } | { kind: "summary"; alphas: number[] };

export interface ExtractionJob {
  modelName: string;
  texts: readonly string[];
  contextPolicy: ContextPolicy;
  format: OutputFormat;
  outPath: string;
}

export function formatContextPolicy(policy: ContextPolicy): string {
  return policy.kind === "per-text" ? "per-text" : `sliding:${policy.window}`;
}

/** Quantize a float64 log-probability vector to the stored float32 form. */
function quantize(logProbs: Float64Array): Float32Array {
  let lp32 = Float32Array.from(logProbs);
  let drift = logSumExp(lp32);
  if (Math.abs(drift) > FILE_NORM_TOL / 4) {
    // Renormalize in float64 and requantize; one pass leaves the drift far
    // inside the file tolerance.
    const adjusted = new Float64Array(logProbs.length);
    for (let i = 0; i < adjusted.length; i++) adjusted[i] = lp32[i] - drift;
    lp32 = Float32Array.from(adjusted);
    drift = logSumExp(lp32);
  }
  if (!(Math.abs(drift) <= FILE_NORM_TOL)) {
    throw new Error(`quantized vector drifted to logsumexp ${drift}`);
  }
  return lp32;
}

/** Per-position distributions for one text under the chosen context policy. */
function contextVectors(
  model: LoadedModel,
  ids: readonly number[],
  policy: ContextPolicy,
  textId: number
): Float64Array[] {
  const maxLen = model.model.config.maxLen;
  const eos = model.vocab.eosId;
  const T = ids.length;
  if (policy.kind === "per-text") {
    if (T + 1 > maxLen) {
      throw new ValidationError(
        `text ${textId} has ${T} subwords but the model context is ${maxLen}; ` +
          `use a sliding window policy (sliding:<L>)`
      );
    }
    // One pass over [eos, tokens]: output t predicts position t.
    return model.model.logProbs([eos, ...ids]).slice(0, T);
  }

  const L = policy.window;
  if (!Number.isInteger(L) || L < 2) {
    throw new ValidationError(`sliding window must be an integer >= 2, got ${L}`);
  }
  if (L + 1 > maxLen) {
    throw new ValidationError(`sliding window ${L} exceeds model context ${maxLen} (max ${maxLen - 1})`);
  }
  const h = Math.floor(L / 2);
  const vectors: Float64Array[] = new Array(T);
  const firstLen = Math.min(L, T);
  const first = model.model.logProbs([eos, ...ids.slice(0, firstLen)]);
  for (let j = 0; j < firstLen; j++) vectors[j] = first[j];
  for (let k = 1; k * h + L - h < T; k++) {
    const start = k * h;
    const end = Math.min(start + L, T);
    const outs = model.model.logProbs(ids.slice(start, end));
    const lo = Math.max(L, start + L - h);
    for (let j = lo; j < end; j++) vectors[j] = outs[j - start - 1];
  }
  return vectors;
}

/** Tokenize and run the model over every text; one record per subword. */
export function extractPositions(
  model: LoadedModel,
  texts: readonly string[],
  policy: ContextPolicy
): PositionRecord[] {
  const records: PositionRecord[] = [];
  texts.forEach((text, textId) => {
    const tokens = tokenizeText(model.vocab, text, textId);
    if (tokens.length === 0) {
      throw new ValidationError(`text ${textId} contains no words`);
    }
    const ids = tokens.map((t) => t.id);
    const vectors = contextVectors(model, ids, policy, textId);
    tokens.forEach((tok, j) => {
      records.push({
        textId,
        wordIndex: tok.wordIndex,
        subwordIndex: tok.subwordIndex,
        realizedId: tok.id,
        logProbs: quantize(vectors[j]),
      });
    });
  });
  return records;
}

export interface ExtractionResult {
  positions: number;
  files: string[];
}

/** Run a job end to end and write the requested output format. */
export function runExtraction(model: LoadedModel, job: ExtractionJob): ExtractionResult {
  if (job.format.kind === "summary" && job.format.alphas.length === 0) {
    throw new ValidationError("summary format needs at least one entropy order");
  }
  const records = extractPositions(model, job.texts, job.contextPolicy);
  if (job.format.kind === "fulldist") {
    const manifest: Manifest = {
      context_policy: formatContextPolicy(job.contextPolicy),
      eos_token: model.vocab.tokens[model.vocab.eosId],
      model: job.modelName,
      tokenizer_hash: model.vocab.hash(),
      vocabulary: model.vocab.tokens,
      word_initial_marker: model.vocab.marker,
    };
    writeFulldist(job.outPath, records, model.vocab.size, model.vocab.eosId, manifest);
    return { positions: records.length, files: [job.outPath, job.outPath + ".json"] };
  }
  writeSummary(job.outPath, records, job.format.alphas);
  return { positions: records.length, files: [job.outPath] };
}
