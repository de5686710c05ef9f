/**
 * End-to-end extraction: decode a batch of audio files, run the log-mel
 * front end, forward through a pre-trained encoder, and write the
 * pre-pooling activation as a time x batch x channel tensor plus a run
 * manifest the analysis toolkit consumes directly.
 */

import { mkdirSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { readCheckpoint } from "./checkpoint.js";
import { AudioDecodeError, EmptyAudioDir, EpochExtractionError } from "./errors.js";
import { FeatureTensor, ManifestEntry, writeManifest, writeTensorFile } from "./fst.js";
import { DEFAULT_MEL, logMelSpectrogram, MelConfig } from "./mel.js";
import { loadEncoder, MODEL_NAMES } from "./models.js";
import { decodeWav } from "./wav.js";

export interface ExtractionConfig {
  model: string; // cnn6 | cnn10 | resnet22
  checkpoint: string;
  audioDir: string;
  outDir: string;
  melBins?: number; // 64
  window?: number; // 1024 (Hann)
  hop?: number; // 512
  batch?: number; // 12
  sampleRate?: number; // 32000
}

interface ResolvedConfig extends Required<ExtractionConfig> {
  mel: MelConfig;
}

function resolve(config: ExtractionConfig): ResolvedConfig {
  const full = {
    melBins: DEFAULT_MEL.melBins,
    window: DEFAULT_MEL.window,
    hop: DEFAULT_MEL.hop,
    batch: 12,
    sampleRate: DEFAULT_MEL.sampleRate,
    ...config,
  };
  if (!(MODEL_NAMES as readonly string[]).includes(full.model)) {
    throw new Error(`unknown model ${full.model}; choose ${MODEL_NAMES.join(", ")}`);
  }
  for (const key of ["melBins", "window", "hop", "batch"] as const) {
    if (full[key] < 1) throw new Error(`${key} must be >= 1, got ${full[key]}`);
  }
  const mel: MelConfig = {
    sampleRate: full.sampleRate,
    window: full.window,
    hop: full.hop,
    melBins: full.melBins,
    fmin: DEFAULT_MEL.fmin,
    fmax: Math.min(DEFAULT_MEL.fmax, full.sampleRate / 2),
  };
  return { ...full, mel };
}

function listAudioFiles(dir: string): string[] {
  let names: string[];
  try {
    names = readdirSync(dir);
  } catch (err) {
    throw new EmptyAudioDir(`cannot list ${dir}: ${err}`);
  }
  return names.filter((n) => n.toLowerCase().endsWith(".wav")).sort();
}

function loadBatch(cfg: ResolvedConfig): Float32Array[] {
  const files = listAudioFiles(cfg.audioDir);
  if (files.length === 0) {
    throw new EmptyAudioDir(`no .wav files in ${cfg.audioDir}`);
  }
  if (files.length < cfg.batch) {
    throw new EmptyAudioDir(
      `need at least ${cfg.batch} audio files for one batch, ` +
        `found ${files.length} in ${cfg.audioDir}`,
    );
  }
  const clips: Float32Array[] = [];
  for (const name of files.slice(0, cfg.batch)) {
    const path = join(cfg.audioDir, name);
    const audio = decodeWav(path);
    if (audio.sampleRate !== cfg.sampleRate) {
      throw new AudioDecodeError(
        path,
        `sample rate ${audio.sampleRate} != configured ${cfg.sampleRate}; ` +
          "resample the audio first",
      );
    }
    if (audio.samples.length < cfg.window) {
      throw new AudioDecodeError(
        path,
        `clip has ${audio.samples.length} samples, shorter than one ` +
          `${cfg.window}-sample analysis window`,
      );
    }
    clips.push(audio.samples);
  }
  // a batch must share one frame count; truncating to the shortest clip
  // avoids the zero-padding that would distort channel statistics
  const minLen = Math.min(...clips.map((c) => c.length));
  return clips.map((c) => (c.length === minLen ? c : c.subarray(0, minLen)));
}

/** Run one checkpoint over one batch; returns the activation tensor. */
export function extractTensor(config: ExtractionConfig): FeatureTensor {
  const cfg = resolve(config);
  const clips = loadBatch(cfg);
  const encoder = loadEncoder(cfg.model, readCheckpoint(cfg.checkpoint), cfg.melBins);

  const activations = clips.map((clip) => {
    const { frames, mel } = logMelSpectrogram(clip, cfg.mel);
    return encoder.forward(mel, frames);
  });

  const frames = activations[0].frames;
  const channels = activations[0].channels;
  const batch = activations.length;
  const data = new Float32Array(frames * batch * channels);
  for (let b = 0; b < batch; b++) {
    const act = activations[b].data; // channels x frames
    for (let t = 0; t < frames; t++) {
      const rowOut = (t * batch + b) * channels;
      for (let c = 0; c < channels; c++) {
        data[rowOut + c] = act[c * frames + t];
      }
    }
  }
  return { dims: [frames, batch, channels], data };
}

/** Single-checkpoint extraction: one tensor plus a one-entry manifest. */
export function extract(config: ExtractionConfig, epoch = 0): ManifestEntry[] {
  const cfg = resolve(config);
  mkdirSync(cfg.outDir, { recursive: true });
  const tensor = extractTensor(config);
  const name = `ep${String(epoch).padStart(3, "0")}.fst`;
  writeTensorFile(tensor, join(cfg.outDir, name));
  const entries: ManifestEntry[] = [{ epoch, tensor: name, encoder: cfg.model }];
  writeManifest(entries, join(cfg.outDir, "manifest.jsonl"));
  return entries;
}

/**
 * Multi-checkpoint extraction over a training series; one manifest entry
 * per checkpoint, epoch = position. On failure the entries written so far
 * are kept and the error names the failing epoch.
 */
export function extractSeries(configs: ExtractionConfig[]): ManifestEntry[] {
  if (configs.length === 0) throw new EmptyAudioDir("no checkpoints given");
  const outDir = resolve(configs[0]).outDir;
  mkdirSync(outDir, { recursive: true });
  const entries: ManifestEntry[] = [];
  for (let epoch = 0; epoch < configs.length; epoch++) {
    try {
      const tensor = extractTensor(configs[epoch]);
      const name = `ep${String(epoch).padStart(3, "0")}.fst`;
      writeTensorFile(tensor, join(outDir, name));
      entries.push({ epoch, tensor: name, encoder: resolve(configs[epoch]).model });
    } catch (err) {
      writeManifest(entries, join(outDir, "manifest.jsonl"));
      throw new EpochExtractionError(epoch, err as Error);
    }
  }
  writeManifest(entries, join(outDir, "manifest.jsonl"));
  return entries;
}
