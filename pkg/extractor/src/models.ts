/**
 * Inference-only forward passes for the PANNs-family audio-tagging
 * encoders (cnn6, cnn10, resnet22), up to the last time-resolved
 * activation: the output is the feature map after the final conv stage
 * with the frequency axis averaged out, i.e. the layer just before global
 * time pooling. Weight names and shapes follow the PANNs state dicts so
 * exported checkpoints load unchanged; tensors the capture never reaches
 * (fc heads) are ignored.
 */

import { Checkpoint, requireTensor } from "./checkpoint.js";
import { CheckpointMismatch } from "./errors.js";

export const MODEL_NAMES = ["cnn6", "cnn10", "resnet22"] as const;
export type ModelName = (typeof MODEL_NAMES)[number];

const BN_EPS = 1e-5;

/** One item's feature map, channels-first. */
interface Plane {
  c: number;
  h: number; // time frames
  w: number; // mel bins
  data: Float32Array;
}

interface FoldedBn {
  scale: Float32Array;
  shift: Float32Array;
}

function foldBn(ckpt: Checkpoint, prefix: string, channels: number): FoldedBn {
  const gamma = requireTensor(ckpt, `${prefix}.weight`, [channels]).data;
  const beta = requireTensor(ckpt, `${prefix}.bias`, [channels]).data;
  const mean = requireTensor(ckpt, `${prefix}.running_mean`, [channels]).data;
  const variance = requireTensor(ckpt, `${prefix}.running_var`, [channels]).data;
  const scale = new Float32Array(channels);
  const shift = new Float32Array(channels);
  for (let i = 0; i < channels; i++) {
    scale[i] = gamma[i] / Math.sqrt(variance[i] + BN_EPS);
    shift[i] = beta[i] - mean[i] * scale[i];
  }
  return { scale, shift };
}

/** Same-padded stride-1 conv2d over a channels-first plane. */
function conv2d(x: Plane, weight: Float32Array, cOut: number, k: number): Plane {
  const pad = (k - 1) / 2;
  const { c: cIn, h, w } = x;
  const out = new Float32Array(cOut * h * w);
  const inPlane = h * w;
  for (let co = 0; co < cOut; co++) {
    const outOff = co * inPlane;
    for (let ci = 0; ci < cIn; ci++) {
      const inOff = ci * inPlane;
      const wOff = (co * cIn + ci) * k * k;
      for (let ky = 0; ky < k; ky++) {
        const dy = ky - pad;
        for (let kx = 0; kx < k; kx++) {
          const dx = kx - pad;
          const wv = weight[wOff + ky * k + kx];
          if (wv === 0) continue;
          const yLo = Math.max(0, -dy);
          const yHi = Math.min(h, h - dy);
          for (let y = yLo; y < yHi; y++) {
            const rowOut = outOff + y * w;
            const rowIn = inOff + (y + dy) * w;
            const xLo = Math.max(0, -dx);
            const xHi = Math.min(w, w - dx);
            for (let xx = xLo; xx < xHi; xx++) {
              out[rowOut + xx] += wv * x.data[rowIn + xx + dx];
            }
          }
        }
      }
    }
  }
  return { c: cOut, h, w, data: out };
}

function bnRelu(x: Plane, bn: FoldedBn, relu: boolean): void {
  const plane = x.h * x.w;
  for (let c = 0; c < x.c; c++) {
    const s = bn.scale[c];
    const b = bn.shift[c];
    const off = c * plane;
    for (let i = 0; i < plane; i++) {
      let v = x.data[off + i] * s + b;
      if (relu && v < 0) v = 0;
      x.data[off + i] = v;
    }
  }
}

function avgPool2x2(x: Plane): Plane {
  const h = Math.floor(x.h / 2);
  const w = Math.floor(x.w / 2);
  if (h < 1 || w < 1) {
    throw new CheckpointMismatch(
      `feature map ${x.h}x${x.w} too small to pool; use longer audio`,
    );
  }
  const out = new Float32Array(x.c * h * w);
  for (let c = 0; c < x.c; c++) {
    const inOff = c * x.h * x.w;
    const outOff = c * h * w;
    for (let y = 0; y < h; y++) {
      const r0 = inOff + 2 * y * x.w;
      const r1 = r0 + x.w;
      for (let xx = 0; xx < w; xx++) {
        out[outOff + y * w + xx] =
          (x.data[r0 + 2 * xx] + x.data[r0 + 2 * xx + 1] +
            x.data[r1 + 2 * xx] + x.data[r1 + 2 * xx + 1]) / 4;
      }
    }
  }
  return { c: x.c, h, w, data: out };
}

function addInPlace(x: Plane, y: Plane): void {
  for (let i = 0; i < x.data.length; i++) x.data[i] += y.data[i];
}

function reluInPlace(x: Plane): void {
  for (let i = 0; i < x.data.length; i++) {
    if (x.data[i] < 0) x.data[i] = 0;
  }
}

/** Per-mel-bin batchnorm applied to the raw log-mel plane. */
function applyBn0(mel: Float32Array, frames: number, bins: number, bn: FoldedBn): Plane {
  const data = new Float32Array(frames * bins);
  for (let t = 0; t < frames; t++) {
    for (let m = 0; m < bins; m++) {
      data[t * bins + m] = mel[t * bins + m] * bn.scale[m] + bn.shift[m];
    }
  }
  return { c: 1, h: frames, w: bins, data };
}

/** Mean over the frequency (w) axis: plane -> channels x time. */
function freqMean(x: Plane): { channels: number; frames: number; data: Float32Array } {
  const out = new Float32Array(x.c * x.h);
  for (let c = 0; c < x.c; c++) {
    for (let y = 0; y < x.h; y++) {
      let acc = 0;
      const row = c * x.h * x.w + y * x.w;
      for (let xx = 0; xx < x.w; xx++) acc += x.data[row + xx];
      out[c * x.h + y] = acc / x.w;
    }
  }
  return { channels: x.c, frames: x.h, data: out };
}

export interface Encoder {
  name: ModelName;
  channels: number;
  /** log-mel (frames x melBins) -> pre-pooling activation (channels x frames'). */
  forward(mel: Float32Array, frames: number): {
    channels: number;
    frames: number;
    data: Float32Array;
  };
}

// ---------------------------------------------------------------------------
// plain conv stacks (cnn6: one 5x5 conv per block; cnn10: two 3x3 convs)

interface ConvBlock {
  convs: { weight: Float32Array; k: number; cIn: number; cOut: number; bn: FoldedBn }[];
}

function loadConvBlock(
  ckpt: Checkpoint,
  prefix: string,
  cIn: number,
  cOut: number,
  k: number,
  twoConvs: boolean,
): ConvBlock {
  const convs = [];
  const w1 = requireTensor(ckpt, `${prefix}.conv1.weight`, [cOut, cIn, k, k]);
  convs.push({ weight: w1.data, k, cIn, cOut, bn: foldBn(ckpt, `${prefix}.bn1`, cOut) });
  if (twoConvs) {
    const w2 = requireTensor(ckpt, `${prefix}.conv2.weight`, [cOut, cOut, k, k]);
    convs.push({ weight: w2.data, k, cIn: cOut, cOut, bn: foldBn(ckpt, `${prefix}.bn2`, cOut) });
  }
  return { convs };
}

function runConvBlock(x: Plane, block: ConvBlock, pool: boolean): Plane {
  let cur = x;
  for (const conv of block.convs) {
    cur = conv2d(cur, conv.weight, conv.cOut, conv.k);
    bnRelu(cur, conv.bn, true);
  }
  return pool ? avgPool2x2(cur) : cur;
}

function buildPlainCnn(
  name: ModelName,
  ckpt: Checkpoint,
  melBins: number,
  kernel: number,
  twoConvs: boolean,
): Encoder {
  const widths = [64, 128, 256, 512];
  const bn0 = foldBn(ckpt, "bn0", melBins);
  const blocks: ConvBlock[] = [];
  let cIn = 1;
  widths.forEach((cOut, i) => {
    blocks.push(loadConvBlock(ckpt, `conv_block${i + 1}`, cIn, cOut, kernel, twoConvs));
    cIn = cOut;
  });
  return {
    name,
    channels: 512,
    forward(mel, frames) {
      let x = applyBn0(mel, frames, melBins, bn0);
      for (const block of blocks) x = runConvBlock(x, block, true);
      return freqMean(x);
    },
  };
}

// ---------------------------------------------------------------------------
// resnet22: conv stem, four residual stages [2,2,2,2], wide conv tail

interface ResidualBlock {
  stride: number;
  conv1: { weight: Float32Array; bn: FoldedBn };
  conv2: { weight: Float32Array; bn: FoldedBn };
  down?: { weight: Float32Array; bn: FoldedBn }; // 1x1 conv after avg-pool
  cIn: number;
  cOut: number;
}

function loadResidual(
  ckpt: Checkpoint,
  prefix: string,
  cIn: number,
  cOut: number,
  stride: number,
): ResidualBlock {
  const block: ResidualBlock = {
    stride,
    cIn,
    cOut,
    conv1: {
      weight: requireTensor(ckpt, `${prefix}.conv1.weight`, [cOut, cIn, 3, 3]).data,
      bn: foldBn(ckpt, `${prefix}.bn1`, cOut),
    },
    conv2: {
      weight: requireTensor(ckpt, `${prefix}.conv2.weight`, [cOut, cOut, 3, 3]).data,
      bn: foldBn(ckpt, `${prefix}.bn2`, cOut),
    },
  };
  if (stride !== 1 || cIn !== cOut) {
    // stride-2 shortcut is avg-pool then 1x1 conv then bn, indices 1 and 2
    block.down = {
      weight: requireTensor(ckpt, `${prefix}.downsample.1.weight`, [cOut, cIn, 1, 1]).data,
      bn: foldBn(ckpt, `${prefix}.downsample.2`, cOut),
    };
  }
  return block;
}

function runResidual(x: Plane, block: ResidualBlock): Plane {
  let main = block.stride === 2 ? avgPool2x2(x) : x;
  main = conv2d(main, block.conv1.weight, block.cOut, 3);
  bnRelu(main, block.conv1.bn, true);
  main = conv2d(main, block.conv2.weight, block.cOut, 3);
  bnRelu(main, block.conv2.bn, false);
  let identity = x;
  if (block.down) {
    identity = conv2d(block.stride === 2 ? avgPool2x2(x) : x,
                      block.down.weight, block.cOut, 1);
    bnRelu(identity, block.down.bn, false);
  }
  addInPlace(main, identity);
  reluInPlace(main);
  return main;
}

function buildResnet22(ckpt: Checkpoint, melBins: number): Encoder {
  const bn0 = foldBn(ckpt, "bn0", melBins);
  const stem = loadConvBlock(ckpt, "conv_block1", 1, 64, 3, true);
  const stages: ResidualBlock[] = [];
  const widths = [64, 128, 256, 512];
  let cIn = 64;
  widths.forEach((cOut, stage) => {
    for (let i = 0; i < 2; i++) {
      const stride = stage > 0 && i === 0 ? 2 : 1;
      stages.push(loadResidual(ckpt, `resnet.layer${stage + 1}.${i}`, cIn, cOut, stride));
      cIn = cOut;
    }
  });
  const tail = loadConvBlock(ckpt, "conv_block_after1", 512, 2048, 3, true);
  return {
    name: "resnet22",
    channels: 2048,
    forward(mel, frames) {
      let x = applyBn0(mel, frames, melBins, bn0);
      x = runConvBlock(x, stem, true);
      for (const block of stages) x = runResidual(x, block);
      x = avgPool2x2(x);
      x = runConvBlock(x, tail, false);
      return freqMean(x);
    },
  };
}

export function loadEncoder(
  name: string,
  ckpt: Checkpoint,
  melBins: number,
): Encoder {
  switch (name) {
    case "cnn6":
      return buildPlainCnn("cnn6", ckpt, melBins, 5, false);
    case "cnn10":
      return buildPlainCnn("cnn10", ckpt, melBins, 3, true);
    case "resnet22":
      return buildResnet22(ckpt, melBins);
    default:
      throw new CheckpointMismatch(
        `unknown model ${name}; choose one of ${MODEL_NAMES.join(", ")}`,
      );
  }
}
