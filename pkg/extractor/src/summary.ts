/**
 * Per-position summary TSV writer.
 *
 * Columns: text_id, word_index, subword_index, surprisal_bits, then one
 * renyi_<order>_bits column per requested entropy order.  Numbers are
 * printed in shortest round-trip form.
 */

import * as fs from "node:fs";

import { formatAlpha, renyiBits, surprisalBits } from "./entropy";
import { PositionRecord } from "./fulldist";

export function encodeSummary(records: readonly PositionRecord[], alphas: readonly number[]): string {
  const header = ["text_id", "word_index", "subword_index", "surprisal_bits"].concat(
    alphas.map((a) => `renyi_${formatAlpha(a)}_bits`)
  );
  const lines = [header.join("\t")];
  for (const rec of records) {
    const cells = [
      String(rec.textId),
      String(rec.wordIndex),
      String(rec.subwordIndex),
      String(surprisalBits(rec.logProbs, rec.realizedId)),
    ];
    for (const a of alphas) cells.push(String(renyiBits(rec.logProbs, a)));
    lines.push(cells.join("\t"));
  }
  return lines.join("\n") + "\n";
}

export function writeSummary(
  path: string,
  records: readonly PositionRecord[],
  alphas: readonly number[]
): void {
  fs.writeFileSync(path, encodeSummary(records, alphas), "utf8");
}
