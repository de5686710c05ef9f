/**
 * Minimal RIFF/WAVE decoder: PCM 16-bit and IEEE float 32-bit, any channel
 * count (channels are averaged to mono). No resampling; callers must check
 * the sample rate against their front-end configuration.
 */

import { readFileSync } from "node:fs";
import { AudioDecodeError } from "./errors.js";

export interface DecodedAudio {
  samples: Float32Array; // mono, in [-1, 1]
  sampleRate: number;
}

export function decodeWav(path: string): DecodedAudio {
  let raw: Buffer;
  try {
    raw = readFileSync(path);
  } catch (err) {
    throw new AudioDecodeError(path, `cannot read file: ${err}`);
  }
  if (raw.length < 44 || raw.toString("ascii", 0, 4) !== "RIFF" ||
      raw.toString("ascii", 8, 12) !== "WAVE") {
    throw new AudioDecodeError(path, "not a RIFF/WAVE file");
  }

  let format = 0;
  let channels = 0;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let dataOffset = -1;
  let dataLength = 0;

  let offset = 12;
  while (offset + 8 <= raw.length) {
    const chunkId = raw.toString("ascii", offset, offset + 4);
    const chunkSize = raw.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (chunkId === "fmt ") {
      format = raw.readUInt16LE(body);
      channels = raw.readUInt16LE(body + 2);
      sampleRate = raw.readUInt32LE(body + 4);
      bitsPerSample = raw.readUInt16LE(body + 14);
    } else if (chunkId === "data") {
      dataOffset = body;
      dataLength = Math.min(chunkSize, raw.length - body);
    }
    offset = body + chunkSize + (chunkSize % 2);
  }

  if (dataOffset < 0) throw new AudioDecodeError(path, "no data chunk");
  if (channels < 1) throw new AudioDecodeError(path, "no channels");

  let frames: number;
  let read: (frame: number, channel: number) => number;
  if (format === 1 && bitsPerSample === 16) {
    frames = Math.floor(dataLength / (2 * channels));
    read = (frame, ch) =>
      raw.readInt16LE(dataOffset + 2 * (frame * channels + ch)) / 32768;
  } else if (format === 3 && bitsPerSample === 32) {
    frames = Math.floor(dataLength / (4 * channels));
    read = (frame, ch) =>
      raw.readFloatLE(dataOffset + 4 * (frame * channels + ch));
  } else {
    throw new AudioDecodeError(
      path,
      `unsupported encoding (format=${format}, bits=${bitsPerSample}); ` +
        "use PCM16 or float32",
    );
  }

  const samples = new Float32Array(frames);
  for (let i = 0; i < frames; i++) {
    let acc = 0;
    for (let ch = 0; ch < channels; ch++) acc += read(i, ch);
    samples[i] = acc / channels;
  }
  return { samples, sampleRate };
}

/** Testing/tooling helper: encode mono float samples as a PCM16 WAV. */
export function encodeWavPcm16(
  samples: Float32Array,
  sampleRate: number,
): Buffer {
  const data = Buffer.alloc(samples.length * 2);
  for (let i = 0; i < samples.length; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]));
    data.writeInt16LE(Math.round(v * 32767), i * 2);
  }
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + data.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(1, 20); // PCM
  header.writeUInt16LE(1, 22); // mono
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * 2, 28);
  header.writeUInt16LE(2, 32);
  header.writeUInt16LE(16, 34);
  header.write("data", 36, "ascii");
  header.writeUInt32LE(data.length, 40);
  return Buffer.concat([header, data]);
}
