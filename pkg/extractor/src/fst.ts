/**
 * Writer for the feature-tensor interchange format (.fst) and the JSONL
 * run manifest.
 *
 * Layout: magic "FSTF", u16 version = 1 (LE), u8 dtype (1 = f32), u8 ndim
 * = 3, then T, B, C as little-endian u64, then row-major float payload
 * (index = t*B*C + b*C + c).
 */

import { writeFileSync } from "node:fs";

export const FST_MAGIC = "FSTF";
export const FST_VERSION = 1;
export const FST_HEADER_SIZE = 32;

/** Activation block with axes time x batch x channel, values row-major. */
export interface FeatureTensor {
  dims: [number, number, number];
  data: Float32Array;
}

export function encodeTensor(tensor: FeatureTensor): Buffer {
  const [t, b, c] = tensor.dims;
  if (t < 1 || b < 1 || c < 1) {
    throw new Error(`tensor dims must be >= 1, got ${tensor.dims}`);
  }
  if (tensor.data.length !== t * b * c) {
    throw new Error(
      `payload length ${tensor.data.length} != ${t}*${b}*${c}`,
    );
  }
  const header = Buffer.alloc(FST_HEADER_SIZE);
  header.write(FST_MAGIC, 0, "ascii");
  header.writeUInt16LE(FST_VERSION, 4);
  header.writeUInt8(1, 6); // dtype f32
  header.writeUInt8(3, 7);
  header.writeBigUInt64LE(BigInt(t), 8);
  header.writeBigUInt64LE(BigInt(b), 16);
  header.writeBigUInt64LE(BigInt(c), 24);
  const payload = Buffer.from(
    tensor.data.buffer,
    tensor.data.byteOffset,
    tensor.data.byteLength,
  );
  return Buffer.concat([header, payload]);
}

export function writeTensorFile(tensor: FeatureTensor, path: string): number {
  const bytes = encodeTensor(tensor);
  writeFileSync(path, bytes);
  return bytes.length;
}

export interface ManifestEntry {
  epoch: number;
  tensor: string;
  encoder?: string;
  scores?: Record<string, number>;
}

export function writeManifest(entries: ManifestEntry[], path: string): void {
  const lines = entries.map((e) => {
    const obj: Record<string, unknown> = { epoch: e.epoch, tensor: e.tensor };
    if (e.scores !== undefined) obj.scores = e.scores;
    if (e.encoder) obj.encoder = e.encoder;
    return JSON.stringify(obj);
  });
  writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}
