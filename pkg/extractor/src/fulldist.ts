/**
 * Binary full-distribution writer.
 *
 * Layout, all little-endian:
 *   header: 4-byte magic "RTD1", u32 vocab size, u32 position count, u32 eos id
 *   record: u32 text id, u32 word index, u16 subword index, u32 realized id,
 *           then vocab-size float32 natural-log probabilities
 * A JSON sidecar at out-path + ".json" carries the vocabulary, the marker
 * and EOS conventions, the model name, the context policy, and a tokenizer
 * hash, so readers can reconstruct token strings and provenance.
 */

import * as fs from "node:fs";

export const FULLDIST_MAGIC = "RTD1";
export const HEADER_BYTES = 16;
export const RECORD_HEAD_BYTES = 14;

/** Written float32 vectors must satisfy |logsumexp| <= this. */
export const FILE_NORM_TOL = 1e-4;

export interface PositionRecord {
  textId: number;
  wordIndex: number;
  subwordIndex: number;
  realizedId: number;
  logProbs: Float32Array;
}

export function encodeFulldist(
  records: readonly PositionRecord[],
  vocabSize: number,
  eosId: number
): Buffer {
  const recordBytes = RECORD_HEAD_BYTES + 4 * vocabSize;
  const buf = Buffer.alloc(HEADER_BYTES + records.length * recordBytes);
  buf.write(FULLDIST_MAGIC, 0, "ascii");
  buf.writeUInt32LE(vocabSize, 4);
  buf.writeUInt32LE(records.length, 8);
  buf.writeUInt32LE(eosId, 12);
  let offset = HEADER_BYTES;
  for (const rec of records) {
    if (rec.logProbs.length !== vocabSize) {
      throw new Error(`record vector length ${rec.logProbs.length} != vocab ${vocabSize}`);
    }
    buf.writeUInt32LE(rec.textId, offset);
    buf.writeUInt32LE(rec.wordIndex, offset + 4);
    buf.writeUInt16LE(rec.subwordIndex, offset + 8);
    buf.writeUInt32LE(rec.realizedId, offset + 10);
    offset += RECORD_HEAD_BYTES;
    for (let v = 0; v < vocabSize; v++) {
      buf.writeFloatLE(rec.logProbs[v], offset);
      offset += 4;
    }
  }
  return buf;
}

export interface Manifest {
  context_policy: string;
  eos_token: string;
  model: string;
  tokenizer_hash: string;
  vocabulary: readonly string[];
  word_initial_marker: string;
}

export function writeFulldist(
  path: string,
  records: readonly PositionRecord[],
  vocabSize: number,
  eosId: number,
  manifest: Manifest
): void {
  fs.writeFileSync(path, encodeFulldist(records, vocabSize, eosId));
  fs.writeFileSync(path + ".json", JSON.stringify(manifest, null, 1) + "\n", "utf8");
}
