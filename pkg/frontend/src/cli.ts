#!/usr/bin/env node
/** Command line entry: export contextual vectors for a segmented corpus. */

import * as path from "node:path";
import { fileURLToPath } from "node:url";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { LANGUAGES, type Language } from "./corpus.js";
import { modelIds } from "./encoder.js";
import { exportEmbeddings, RECIPES, POOLINGS, type Recipe, type Pooling } from "./export.js";

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .scriptName("spanseg-export")
    .command("export", "write one vector record per corpus sentence", (y) =>
      y
        .option("model", { type: "string", demandOption: true, choices: modelIds() })
        .option("recipe", {
          type: "string",
          default: "last_four_concat",
          choices: RECIPES as unknown as string[],
        })
        .option("pooling", {
          type: "string",
          default: "mean_subtokens",
          choices: POOLINGS as unknown as string[],
        })
        .option("in", { type: "string", demandOption: true, describe: "segmented corpus" })
        .option("out", { type: "string", demandOption: true, describe: "output vector file" })
        .option("language", {
          type: "string",
          default: "vietnamese",
          choices: LANGUAGES as unknown as string[],
        }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    });

  try {
    const args = await parser.parse(argv);
    exportEmbeddings({
      model: args.model as string,
      recipe: args.recipe as Recipe,
      pooling: args.pooling as Pooling,
      corpusPath: args.in as string,
      outputPath: args.out as string,
      language: args.language as Language,
    });
    return 0;
  } catch (err) {
    const msg = err instanceof Error ? err.message : String(err);
    process.stderr.write(`error: ${msg}\n`);
    return 1;
  }
}

const isDirect =
  process.argv[1] !== undefined &&
  path.resolve(process.argv[1]) === fileURLToPath(import.meta.url);
if (isDirect) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
