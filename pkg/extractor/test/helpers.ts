/** Shared test fixtures: deterministic RNG, synthetic audio, random
 * checkpoints with the exact weight schema of each encoder. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { TensorEntry, writeCheckpoint } from "../src/checkpoint.js";
import { encodeWavPcm16 } from "../src/wav.js";

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussianPair(rand: () => number): [number, number] {
  const u = Math.max(rand(), 1e-12);
  const v = rand();
  const r = Math.sqrt(-2 * Math.log(u));
  return [r * Math.cos(2 * Math.PI * v), r * Math.sin(2 * Math.PI * v)];
}

export function randomTensor(
  shape: number[],
  std: number,
  rand: () => number,
): TensorEntry {
  const count = shape.reduce((a, b) => a * b, 1);
  const data = new Float32Array(count);
  for (let i = 0; i < count; i += 2) {
    const [g1, g2] = gaussianPair(rand);
    data[i] = g1 * std;
    if (i + 1 < count) data[i + 1] = g2 * std;
  }
  return { shape, data };
}

function bnTensors(
  tensors: Map<string, TensorEntry>,
  prefix: string,
  channels: number,
  rand: () => number,
): void {
  const near = (base: number, spread: number) => {
    const data = new Float32Array(channels);
    for (let i = 0; i < channels; i++) data[i] = base + (rand() - 0.5) * spread;
    return { shape: [channels], data };
  };
  tensors.set(`${prefix}.weight`, near(1.0, 0.2));
  tensors.set(`${prefix}.bias`, near(0.0, 0.2));
  tensors.set(`${prefix}.running_mean`, near(0.0, 0.2));
  tensors.set(`${prefix}.running_var`, near(1.0, 0.2));
}

function convBlock(
  tensors: Map<string, TensorEntry>,
  prefix: string,
  cIn: number,
  cOut: number,
  k: number,
  twoConvs: boolean,
  rand: () => number,
): void {
  const he = (fanIn: number) => Math.sqrt(2 / fanIn);
  tensors.set(`${prefix}.conv1.weight`,
    randomTensor([cOut, cIn, k, k], he(cIn * k * k), rand));
  bnTensors(tensors, `${prefix}.bn1`, cOut, rand);
  if (twoConvs) {
    tensors.set(`${prefix}.conv2.weight`,
      randomTensor([cOut, cOut, k, k], he(cOut * k * k), rand));
    bnTensors(tensors, `${prefix}.bn2`, cOut, rand);
  }
}

export function makeCheckpoint(
  model: "cnn6" | "cnn10" | "resnet22",
  melBins: number,
  seed = 1,
): Map<string, TensorEntry> {
  const rand = mulberry32(seed);
  const tensors = new Map<string, TensorEntry>();
  bnTensors(tensors, "bn0", melBins, rand);
  const widths = [64, 128, 256, 512];

  if (model === "cnn6" || model === "cnn10") {
    const k = model === "cnn6" ? 5 : 3;
    let cIn = 1;
    widths.forEach((cOut, i) => {
      convBlock(tensors, `conv_block${i + 1}`, cIn, cOut, k, model === "cnn10", rand);
      cIn = cOut;
    });
    return tensors;
  }

  convBlock(tensors, "conv_block1", 1, 64, 3, true, rand);
  let cIn = 64;
  widths.forEach((cOut, stage) => {
    for (let i = 0; i < 2; i++) {
      const prefix = `resnet.layer${stage + 1}.${i}`;
      const he = Math.sqrt(2 / (cIn * 9));
      tensors.set(`${prefix}.conv1.weight`, randomTensor([cOut, cIn, 3, 3], he, rand));
      bnTensors(tensors, `${prefix}.bn1`, cOut, rand);
      tensors.set(`${prefix}.conv2.weight`,
        randomTensor([cOut, cOut, 3, 3], Math.sqrt(2 / (cOut * 9)), rand));
      bnTensors(tensors, `${prefix}.bn2`, cOut, rand);
      if (stage > 0 && i === 0) {
        tensors.set(`${prefix}.downsample.1.weight`,
          randomTensor([cOut, cIn, 1, 1], Math.sqrt(2 / cIn), rand));
        bnTensors(tensors, `${prefix}.downsample.2`, cOut, rand);
      }
      cIn = cOut;
    }
  });
  convBlock(tensors, "conv_block_after1", 512, 2048, 3, true, rand);
  return tensors;
}

export function writeModelCheckpoint(
  dir: string,
  model: "cnn6" | "cnn10" | "resnet22",
  melBins: number,
  seed = 1,
  name = `${model}.safetensors`,
): string {
  mkdirSync(dir, { recursive: true });
  const path = join(dir, name);
  writeCheckpoint(makeCheckpoint(model, melBins, seed), path);
  return path;
}

/** A soft tone + noise clip; distinct per index so batch items differ. */
export function makeClip(
  samples: number,
  sampleRate: number,
  index: number,
): Float32Array {
  const rand = mulberry32(1000 + index);
  const freq = 220 * Math.pow(2, index / 4);
  const out = new Float32Array(samples);
  for (let i = 0; i < samples; i++) {
    const t = i / sampleRate;
    out[i] = 0.4 * Math.sin(2 * Math.PI * freq * t) +
      0.2 * Math.sin(2 * Math.PI * 2.3 * freq * t) +
      0.1 * (rand() * 2 - 1);
  }
  return out;
}

export function writeWavDir(
  dir: string,
  count: number,
  samples: number,
  sampleRate: number,
): string[] {
  mkdirSync(dir, { recursive: true });
  const paths: string[] = [];
  for (let i = 0; i < count; i++) {
    const path = join(dir, `clip${String(i).padStart(2, "0")}.wav`);
    writeFileSync(path, encodeWavPcm16(makeClip(samples, sampleRate, i), sampleRate));
    paths.push(path);
  }
  return paths;
}

/** Parser for .fst files, independent of the writer under test. */
export function parseFst(raw: Buffer): {
  dims: [number, number, number];
  data: Float32Array;
} {
  if (raw.toString("ascii", 0, 4) !== "FSTF") throw new Error("bad magic");
  if (raw.readUInt16LE(4) !== 1) throw new Error("bad version");
  if (raw.readUInt8(6) !== 1) throw new Error("expected f32 dtype");
  if (raw.readUInt8(7) !== 3) throw new Error("expected rank 3");
  const dims: [number, number, number] = [
    Number(raw.readBigUInt64LE(8)),
    Number(raw.readBigUInt64LE(16)),
    Number(raw.readBigUInt64LE(24)),
  ];
  const count = dims[0] * dims[1] * dims[2];
  if (raw.length !== 32 + count * 4) {
    throw new Error(`file is ${raw.length} bytes, expected ${32 + count * 4}`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) data[i] = raw.readFloatLE(32 + i * 4);
  return { dims, data };
}
