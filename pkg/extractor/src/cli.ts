#!/usr/bin/env node
/**
 * extract --model cnn10 --checkpoint f.safetensors --audio-dir d/ --out run/
 *
 * Repeat --checkpoint to extract a whole training series (epochs in the
 * order given). Exit codes: 0 success, 2 input error.
 */

import { parseArgs } from "node:util";
import { extract, extractSeries, ExtractionConfig } from "./extract.js";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        model: { type: "string" },
        checkpoint: { type: "string", multiple: true },
        "audio-dir": { type: "string" },
        out: { type: "string" },
        batch: { type: "string", default: "12" },
        "mel-bins": { type: "string", default: "64" },
        window: { type: "string", default: "1024" },
        hop: { type: "string", default: "512" },
        "sample-rate": { type: "string", default: "32000" },
        help: { type: "boolean", default: false },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  const opts = parsed.values;
  if (opts.help) {
    console.log(
      "usage: extract --model cnn6|cnn10|resnet22 --checkpoint CKPT " +
        "[--checkpoint CKPT2 ...] --audio-dir DIR --out DIR\n" +
        "       [--batch 12] [--mel-bins 64] [--window 1024] [--hop 512] " +
        "[--sample-rate 32000]",
    );
    return 0;
  }
  const checkpoints = opts.checkpoint ?? [];
  if (!opts.model || checkpoints.length === 0 || !opts["audio-dir"] || !opts.out) {
    console.error("error: --model, --checkpoint, --audio-dir and --out are required");
    return 2;
  }

  const base = {
    model: opts.model,
    audioDir: opts["audio-dir"],
    outDir: opts.out,
    batch: Number(opts.batch),
    melBins: Number(opts["mel-bins"]),
    window: Number(opts.window),
    hop: Number(opts.hop),
    sampleRate: Number(opts["sample-rate"]),
  };

  try {
    const configs: ExtractionConfig[] = checkpoints.map((ckpt) => ({
      ...base,
      checkpoint: ckpt,
    }));
    const entries =
      configs.length === 1 ? extract(configs[0]) : extractSeries(configs);
    console.log(`wrote ${entries.length} epoch(s) to ${opts.out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
