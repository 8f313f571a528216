/**
 * Segmented corpus parsing, just enough to recover the token sequence
 * of every sentence. Vietnamese lines join the syllables of a word with
 * underscores; Chinese lines separate words with spaces and every
 * character is a token.
 */

export type Language = "vietnamese" | "chinese";

export const LANGUAGES: readonly Language[] = ["vietnamese", "chinese"];

export interface Sentence {
  tokens: string[];
}

export class CorpusError extends Error {}

function parseVietnameseLine(line: string, lineno: number): Sentence {
  const words = line.split(/\s+/).filter((w) => w.length > 0);
  if (words.length === 0) {
    throw new CorpusError(`line ${lineno}: empty sentence`);
  }
  const tokens: string[] = [];
  for (const word of words) {
    for (const syllable of word.split("_")) {
      if (syllable.length === 0) {
        throw new CorpusError(`line ${lineno}: empty syllable in ${JSON.stringify(word)}`);
      }
      tokens.push(syllable);
    }
  }
  return { tokens };
}

function parseChineseLine(line: string, lineno: number): Sentence {
  const words = line.split(/\s+/).filter((w) => w.length > 0);
  if (words.length === 0) {
    throw new CorpusError(`line ${lineno}: empty sentence`);
  }
  const tokens: string[] = [];
  for (const word of words) {
    tokens.push(...Array.from(word));
  }
  return { tokens };
}

export function parseCorpus(text: string, language: Language): Sentence[] {
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  const parse = language === "vietnamese" ? parseVietnameseLine : parseChineseLine;
  return lines.map((line, i) => parse(line, i + 1));
}
