export { parseCorpus, CorpusError, LANGUAGES } from "./corpus.js";
export type { Language, Sentence } from "./corpus.js";
export { getModel, modelIds, hiddenState, subtokenize } from "./encoder.js";
export type { EncoderModel } from "./encoder.js";
export {
  exportEmbeddings,
  buildExport,
  sentenceRows,
  recipeDim,
  ExportError,
  RECIPES,
  POOLINGS,
} from "./export.js";
export type { ExportSpec, Recipe, Pooling } from "./export.js";
export { verifyAlignment } from "./verify.js";
