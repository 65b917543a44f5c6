/**
 * Information-theoretic summaries of one next-token distribution.
 *
 * Quantities are computed from the float32-quantized log probabilities that
 * go into the full-distribution dump, so the two output formats describe
 * exactly the same numbers.
 */

const LN2 = Math.LN2;

/** Probability mass below this does not count toward the order-0 support. */
export const SUPPORT_EPS = 1e-12;

export function logSumExp(values: ArrayLike<number>): number {
  let max = -Infinity;
  for (let i = 0; i < values.length; i++) if (values[i] > max) max = values[i];
  if (!Number.isFinite(max)) return max;
  let total = 0;
  for (let i = 0; i < values.length; i++) total += Math.exp(values[i] - max);
  return max + Math.log(total);
}

/** Canonical column label for an entropy order: "0.5", "1", "inf". */
export function formatAlpha(alpha: number): string {
  return Number.isFinite(alpha) ? String(alpha) : "inf";
}

/** Parse an entropy order; accepts "inf"/"infinity" for the min-entropy limit. */
export function parseAlpha(text: string): number {
  const lowered = text.trim().toLowerCase();
  const value = lowered === "inf" || lowered === "infinity" ? Infinity : Number(text);
  if (Number.isNaN(value) || value < 0) {
    throw new RangeError(`entropy order must be >= 0, got ${JSON.stringify(text)}`);
  }
  return value;
}

/** Surprisal of the realized token in bits. */
export function surprisalBits(logProbs: Float32Array, realizedId: number): number {
  return -logProbs[realizedId] / LN2;
}

/**
 * Renyi entropy of the distribution in bits.  Order 1 is Shannon entropy,
 * order 0 the log support size, order infinity the surprisal of the mode.
 */
export function renyiBits(logProbs: Float32Array, alpha: number): number {
  if (alpha < 0 || Number.isNaN(alpha)) throw new RangeError("entropy order must be >= 0");
  const n = logProbs.length;
  const p = new Float64Array(n);
  let total = 0;
  for (let i = 0; i < n; i++) {
    p[i] = Math.exp(logProbs[i]);
    total += p[i];
  }
  for (let i = 0; i < n; i++) p[i] /= total;

  if (alpha === 0) {
    let support = 0;
    for (let i = 0; i < n; i++) if (p[i] > SUPPORT_EPS) support++;
    return Math.log2(support);
  }
  if (alpha === 1) {
    let h = 0;
    for (let i = 0; i < n; i++) if (p[i] > 0) h -= p[i] * Math.log(p[i]);
    return h / LN2;
  }
  if (!Number.isFinite(alpha)) {
    let max = 0;
    for (let i = 0; i < n; i++) if (p[i] > max) max = p[i];
    return -Math.log2(max);
  }
  let powerSum = 0;
  for (let i = 0; i < n; i++) if (p[i] > 0) powerSum += p[i] ** alpha;
  return Math.log2(powerSum) / (1 - alpha);
}
