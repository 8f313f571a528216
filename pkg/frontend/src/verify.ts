/**
 * Alignment checking between a segmented corpus and an exported vector
 * file. Reports the first mismatch found, as the reader downstream
 * would hit it, rather than a full audit.
 */

import type { Sentence } from "./corpus.js";

const HEADER = /^# (\d+) (\d+) (\d+)$/;

/**
 * Check an export against the corpus it claims to cover. Returns [] when
 * everything lines up, else a single-element list describing the first
 * problem. A record may carry either one row per token or token count
 * plus two (begin and end marker rows).
 */
export function verifyAlignment(sentences: Sentence[], fileText: string): string[] {
  const lines = fileText.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }

  let lineAt = 0;
  let sharedDim: number | undefined;

  for (let index = 0; index < sentences.length; index++) {
    if (lineAt >= lines.length) {
      return [`record ${index}: missing (file ends after ${index} records)`];
    }
    const header = lines[lineAt];
    const m = HEADER.exec(header);
    if (m === null) {
      return [`line ${lineAt + 1}: malformed record header ${JSON.stringify(header)}`];
    }
    const [gotIndex, rowCount, dim] = [Number(m[1]), Number(m[2]), Number(m[3])];
    if (gotIndex !== index) {
      return [`record ${index}: header carries index ${gotIndex}`];
    }
    const tokens = sentences[index].tokens.length;
    if (rowCount !== tokens && rowCount !== tokens + 2) {
      return [
        `record ${index}: ${rowCount} rows for ${tokens} tokens (want ${tokens} or ${tokens + 2})`,
      ];
    }
    if (sharedDim === undefined) {
      sharedDim = dim;
    } else if (dim !== sharedDim) {
      return [`record ${index}: dim ${dim}, earlier records have ${sharedDim}`];
    }
    lineAt += 1;

    for (let r = 0; r < rowCount; r++) {
      if (lineAt >= lines.length) {
        return [`record ${index}: file ends inside the record (${r} of ${rowCount} rows)`];
      }
      const row = lines[lineAt];
      const values = row.split(/\s+/).filter((v) => v.length > 0);
      if (values.length !== dim) {
        return [`record ${index} row ${r}: ${values.length} values, header says ${dim}`];
      }
      for (const v of values) {
        const x = Number(v);
        if (!Number.isFinite(x)) {
          return [`record ${index} row ${r}: bad value ${JSON.stringify(v)}`];
        }
      }
      lineAt += 1;
    }

    if (lineAt < lines.length) {
      if (lines[lineAt] !== "") {
        return [`record ${index}: no blank line after the record`];
      }
      lineAt += 1;
    }
  }

  if (lineAt < lines.length) {
    return [`trailing content at line ${lineAt + 1}: corpus has ${sentences.length} sentences`];
  }
  return [];
}
