/**
 * Minimal causal transformer language model.
 *
 * One pre-norm block (multi-head self attention + GELU MLP), learned
 * positional embeddings, and an unembedding tied to the token embedding.
 * All activations are computed in float64 so repeated runs over the same
 * checkpoint and inputs produce bit-identical log probabilities.
 */

export interface ModelConfig {
  dModel: number;
  nHeads: number;
  dFF: number;
  maxLen: number;
}

export interface ModelWeights {
  tokEmbedding: Float64Array; // vocab x dModel, also the unembedding
  posEmbedding: Float64Array; // maxLen x dModel
  ln1Gain: Float64Array;
  ln1Bias: Float64Array;
  attnQ: Float64Array; // dModel x dModel, row major [in][out]
  attnQBias: Float64Array;
  attnK: Float64Array;
  attnKBias: Float64Array;
  attnV: Float64Array;
  attnVBias: Float64Array;
  attnOut: Float64Array;
  attnOutBias: Float64Array;
  ln2Gain: Float64Array;
  ln2Bias: Float64Array;
  mlpIn: Float64Array; // dModel x dFF
  mlpInBias: Float64Array;
  mlpOut: Float64Array; // dFF x dModel
  mlpOutBias: Float64Array;
  lnFGain: Float64Array;
  lnFBias: Float64Array;
}

const LN_EPS = 1e-5;

function layerNorm(x: Float64Array, gain: Float64Array, bias: Float64Array): Float64Array {
  const d = x.length;
  let mean = 0;
  for (let i = 0; i < d; i++) mean += x[i];
  mean /= d;
  let variance = 0;
  for (let i = 0; i < d; i++) variance += (x[i] - mean) ** 2;
  variance /= d;
  const scale = 1 / Math.sqrt(variance + LN_EPS);
  const out = new Float64Array(d);
  for (let i = 0; i < d; i++) out[i] = (x[i] - mean) * scale * gain[i] + bias[i];
  return out;
}

function gelu(x: number): number {
  return 0.5 * x * (1 + Math.tanh(0.7978845608028654 * (x + 0.044715 * x * x * x)));
}

/** y = x W + b with W row major [in][out]. */
function affine(x: Float64Array, w: Float64Array, b: Float64Array, dOut: number): Float64Array {
  const dIn = x.length;
  const out = Float64Array.from(b);
  for (let i = 0; i < dIn; i++) {
    const xi = x[i];
    if (xi === 0) continue;
    const row = i * dOut;
    for (let j = 0; j < dOut; j++) out[j] += xi * w[row + j];
  }
  return out;
}

export class CausalModel {
  readonly config: ModelConfig;
  readonly weights: ModelWeights;
  readonly vocabSize: number;

  constructor(config: ModelConfig, weights: ModelWeights, vocabSize: number) {
    this.config = config;
    this.weights = weights;
    this.vocabSize = vocabSize;
  }

  /**
   * Next-token log probabilities at every input index: output[t] is the
   * distribution over the token following ids[0..t], as natural logs.
   */
  logProbs(ids: readonly number[]): Float64Array[] {
    const { dModel, nHeads, dFF, maxLen } = this.config;
    const w = this.weights;
    const T = ids.length;
    if (T === 0) throw new Error("empty input");
    if (T > maxLen) throw new Error(`input length ${T} exceeds model context ${maxLen}`);
    const dHead = dModel / nHeads;

    const x: Float64Array[] = [];
    for (let t = 0; t < T; t++) {
      const row = new Float64Array(dModel);
      const tok = ids[t] * dModel;
      const pos = t * dModel;
      for (let i = 0; i < dModel; i++) row[i] = w.tokEmbedding[tok + i] + w.posEmbedding[pos + i];
      x.push(row);
    }

    // Attention sublayer: causal, so key/value caches only ever grow.
    const qs: Float64Array[] = [];
    const ks: Float64Array[] = [];
    const vs: Float64Array[] = [];
    for (let t = 0; t < T; t++) {
      const normed = layerNorm(x[t], w.ln1Gain, w.ln1Bias);
      qs.push(affine(normed, w.attnQ, w.attnQBias, dModel));
      ks.push(affine(normed, w.attnK, w.attnKBias, dModel));
      vs.push(affine(normed, w.attnV, w.attnVBias, dModel));
    }
    const invSqrt = 1 / Math.sqrt(dHead);
    for (let t = 0; t < T; t++) {
      const mixed = new Float64Array(dModel);
      for (let h = 0; h < nHeads; h++) {
        const lo = h * dHead;
        const scores = new Float64Array(t + 1);
        let maxScore = -Infinity;
        for (let u = 0; u <= t; u++) {
          let dot = 0;
          for (let i = 0; i < dHead; i++) dot += qs[t][lo + i] * ks[u][lo + i];
          scores[u] = dot * invSqrt;
          if (scores[u] > maxScore) maxScore = scores[u];
        }
        let total = 0;
        for (let u = 0; u <= t; u++) {
          scores[u] = Math.exp(scores[u] - maxScore);
          total += scores[u];
        }
        for (let u = 0; u <= t; u++) {
          const weight = scores[u] / total;
          for (let i = 0; i < dHead; i++) mixed[lo + i] += weight * vs[u][lo + i];
        }
      }
      const projected = affine(mixed, w.attnOut, w.attnOutBias, dModel);
      for (let i = 0; i < dModel; i++) x[t][i] += projected[i];
    }

    // MLP sublayer.
    for (let t = 0; t < T; t++) {
      const normed = layerNorm(x[t], w.ln2Gain, w.ln2Bias);
      const hidden = affine(normed, w.mlpIn, w.mlpInBias, dFF);
      for (let i = 0; i < dFF; i++) hidden[i] = gelu(hidden[i]);
      const projected = affine(hidden, w.mlpOut, w.mlpOutBias, dModel);
      for (let i = 0; i < dModel; i++) x[t][i] += projected[i];
    }

    // Tied unembedding followed by log softmax.
    const out: Float64Array[] = [];
    for (let t = 0; t < T; t++) {
      const h = layerNorm(x[t], w.lnFGain, w.lnFBias);
      const logits = new Float64Array(this.vocabSize);
      let maxLogit = -Infinity;
      for (let v = 0; v < this.vocabSize; v++) {
        let dot = 0;
        const row = v * dModel;
        for (let i = 0; i < dModel; i++) dot += h[i] * w.tokEmbedding[row + i];
        logits[v] = dot;
        if (dot > maxLogit) maxLogit = dot;
      }
      let total = 0;
      for (let v = 0; v < this.vocabSize; v++) total += Math.exp(logits[v] - maxLogit);
      const lse = maxLogit + Math.log(total);
      for (let v = 0; v < this.vocabSize; v++) logits[v] -= lse;
      out.push(logits);
    }
    return out;
  }
}
