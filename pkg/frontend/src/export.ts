/**
 * Contextual vector export.
 *
 * For every sentence in a segmented corpus, write one record holding a
 * vector per token plus begin and end marker rows from the encoder
 * itself, in the plain-text record format the segmenter reads back:
 *
 *   # <sentence-index> <row-count> <dim>
 *   <dim floats, space separated>   (row-count lines)
 *   <blank line>
 *
 * Row count is always token count + 2. Output is deterministic: the
 * same spec produces the same bytes.
 */

import * as fs from "node:fs";
import { parseCorpus, LANGUAGES, type Language, type Sentence } from "./corpus.js";
import { getModel, hiddenState, subtokenize, type EncoderModel } from "./encoder.js";

export type Recipe = "last_four_concat" | "last_layer";
export type Pooling = "mean_subtokens" | "first_subtoken";

export const RECIPES: readonly Recipe[] = ["last_four_concat", "last_layer"];
export const POOLINGS: readonly Pooling[] = ["mean_subtokens", "first_subtoken"];

export interface ExportSpec {
  model: string;
  recipe: Recipe;
  pooling: Pooling;
  corpusPath: string;
  outputPath: string;
  language: Language;
}

export class ExportError extends Error {}

export function recipeDim(model: EncoderModel, recipe: Recipe): number {
  return recipe === "last_four_concat" ? 4 * model.hidden : model.hidden;
}

function checkChoice<T extends string>(value: string, allowed: readonly T[], what: string): T {
  if (!(allowed as readonly string[]).includes(value)) {
    throw new ExportError(`unknown ${what} ${JSON.stringify(value)} (known: ${allowed.join(", ")})`);
  }
  return value as T;
}

/* Vector of one subtoken under the recipe: the last layer alone, or the
   last four layers concatenated deepest-first. */
function recipeVector(
  model: EncoderModel,
  recipe: Recipe,
  subtoken: string,
  position: number,
): number[] {
  if (recipe === "last_layer") {
    return hiddenState(model, subtoken, model.layers - 1, position);
  }
  if (model.layers < 4) {
    throw new ExportError(`model ${model.id} has ${model.layers} layers, need 4 for last_four_concat`);
  }
  const out: number[] = [];
  for (let layer = model.layers - 4; layer < model.layers; layer++) {
    out.push(...hiddenState(model, subtoken, layer, position));
  }
  return out;
}

function mean(vectors: number[][]): number[] {
  const out = new Array<number>(vectors[0].length).fill(0);
  for (const v of vectors) {
    for (let i = 0; i < v.length; i++) {
      out[i] += v[i];
    }
  }
  for (let i = 0; i < out.length; i++) {
    out[i] /= vectors.length;
  }
  return out;
}

/**
 * All rows of one sentence record: begin marker, one pooled vector per
 * token, end marker. Throws when some token has no subtokens.
 */
export function sentenceRows(
  model: EncoderModel,
  recipe: Recipe,
  pooling: Pooling,
  sentence: Sentence,
): number[][] {
  const pieces: string[][] = sentence.tokens.map((token) => {
    const sub = subtokenize(model, token);
    if (sub.length === 0) {
      throw new ExportError(`token ${JSON.stringify(token)} has no subtokens and cannot be aligned`);
    }
    return sub;
  });

  // Positions run over the full subtoken sequence including the markers.
  let position = 0;
  const rows: number[][] = [];
  rows.push(recipeVector(model, recipe, model.bosToken, position));
  position += 1;
  for (const tokenPieces of pieces) {
    const vectors: number[][] = [];
    for (const piece of tokenPieces) {
      vectors.push(recipeVector(model, recipe, piece, position));
      position += 1;
    }
    rows.push(pooling === "first_subtoken" ? vectors[0] : mean(vectors));
  }
  rows.push(recipeVector(model, recipe, model.eosToken, position));
  return rows;
}

function formatRecord(index: number, rows: number[][], dim: number): string {
  const lines: string[] = [`# ${index} ${rows.length} ${dim}`];
  for (const row of rows) {
    lines.push(row.map((x) => x.toFixed(6)).join(" "));
  }
  lines.push("");
  return lines.join("\n");
}

/** Full export file contents for a parsed corpus. */
export function buildExport(
  sentences: Sentence[],
  model: EncoderModel,
  recipe: Recipe,
  pooling: Pooling,
): string {
  const dim = recipeDim(model, recipe);
  const records = sentences.map((sentence, i) =>
    formatRecord(i, sentenceRows(model, recipe, pooling, sentence), dim),
  );
  return records.join("\n");
}

/** Read the corpus, build the export, write it to the output path. */
export function exportEmbeddings(spec: ExportSpec): void {
  const model = getModel(spec.model);
  const recipe = checkChoice(spec.recipe, RECIPES, "recipe");
  const pooling = checkChoice(spec.pooling, POOLINGS, "pooling");
  const language = checkChoice(spec.language, LANGUAGES, "language");
  const text = fs.readFileSync(spec.corpusPath, "utf8");
  const sentences = parseCorpus(text, language);
  fs.writeFileSync(spec.outputPath, buildExport(sentences, model, recipe, pooling), "utf8");
}
