/**
 * Checkpoint container in the safetensors layout: an 8-byte little-endian
 * header length, a JSON table {name: {dtype, shape, data_offsets}}, then
 * the raw little-endian tensor data. PANNs .pth checkpoints convert to
 * this with a two-line torch + safetensors snippet (see README).
 */

import { readFileSync, writeFileSync } from "node:fs";
import { CheckpointMismatch } from "./errors.js";

export interface TensorEntry {
  shape: number[];
  data: Float32Array;
}

export type Checkpoint = Map<string, TensorEntry>;

interface HeaderRecord {
  dtype: string;
  shape: number[];
  data_offsets: [number, number];
}

export function readCheckpoint(path: string): Checkpoint {
  const raw = readFileSync(path);
  if (raw.length < 8) throw new CheckpointMismatch(`${path}: file too short`);
  const headerLen = Number(raw.readBigUInt64LE(0));
  if (headerLen <= 0 || 8 + headerLen > raw.length) {
    throw new CheckpointMismatch(`${path}: bad header length ${headerLen}`);
  }
  let header: Record<string, HeaderRecord>;
  try {
    header = JSON.parse(raw.toString("utf-8", 8, 8 + headerLen));
  } catch (err) {
    throw new CheckpointMismatch(`${path}: header is not valid JSON (${err})`);
  }
  const dataStart = 8 + headerLen;
  const tensors: Checkpoint = new Map();
  for (const [name, rec] of Object.entries(header)) {
    if (name === "__metadata__") continue;
    if (rec.dtype !== "F32") {
      throw new CheckpointMismatch(
        `${path}: tensor ${name} has dtype ${rec.dtype}; export as float32`,
      );
    }
    const [start, end] = rec.data_offsets;
    const count = rec.shape.reduce((a, b) => a * b, 1);
    if (end - start !== count * 4 || dataStart + end > raw.length) {
      throw new CheckpointMismatch(`${path}: tensor ${name} offsets corrupt`);
    }
    const slice = raw.subarray(dataStart + start, dataStart + end);
    // copy to guarantee alignment for the Float32Array view
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++) data[i] = slice.readFloatLE(i * 4);
    tensors.set(name, { shape: rec.shape, data });
  }
  return tensors;
}

export function writeCheckpoint(
  tensors: Map<string, TensorEntry>,
  path: string,
): void {
  const header: Record<string, HeaderRecord> = {};
  let offset = 0;
  const blobs: Buffer[] = [];
  for (const [name, t] of tensors) {
    const bytes = Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength);
    header[name] = {
      dtype: "F32",
      shape: t.shape,
      data_offsets: [offset, offset + bytes.length],
    };
    blobs.push(bytes);
    offset += bytes.length;
  }
  const headerJson = Buffer.from(JSON.stringify(header), "utf-8");
  const prefix = Buffer.alloc(8);
  prefix.writeBigUInt64LE(BigInt(headerJson.length), 0);
  writeFileSync(path, Buffer.concat([prefix, headerJson, ...blobs]));
}

/** Fetch a tensor, enforcing its expected shape. */
export function requireTensor(
  ckpt: Checkpoint,
  name: string,
  shape: number[],
): TensorEntry {
  const t = ckpt.get(name);
  if (!t) {
    throw new CheckpointMismatch(`missing tensor ${name} (expected [${shape}])`);
  }
  if (t.shape.length !== shape.length || t.shape.some((d, i) => d !== shape[i])) {
    throw new CheckpointMismatch(
      `tensor ${name} has shape [${t.shape}], expected [${shape}]`,
    );
  }
  return t;
}
