/**
 * Log mel-spectrogram front end: Hann-windowed power spectrogram (center
 * padding, reflect mode) through a Slaney-style mel filterbank, then
 * 10*log10 with a 1e-10 floor. Matches the torchlibrosa/librosa defaults
 * the PANNs checkpoints were trained with.
 */

export interface MelConfig {
  sampleRate: number;
  window: number; // FFT size == window length (Hann)
  hop: number;
  melBins: number;
  fmin: number;
  fmax: number;
}

export const DEFAULT_MEL: MelConfig = {
  sampleRate: 32000,
  window: 1024,
  hop: 512,
  melBins: 64,
  fmin: 50,
  fmax: 14000,
};

/** Periodic Hann window, as used for STFT analysis. */
export function hannWindow(size: number): Float64Array {
  const w = new Float64Array(size);
  for (let i = 0; i < size; i++) {
    w[i] = 0.5 - 0.5 * Math.cos((2 * Math.PI * i) / size);
  }
  return w;
}

/** In-place iterative radix-2 FFT over interleaved complex data. */
export function fftComplex(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  if ((n & (n - 1)) !== 0) throw new Error(`FFT size ${n} is not a power of 2`);
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const ang = (-2 * Math.PI) / len;
    const wRe = Math.cos(ang);
    const wIm = Math.sin(ang);
    for (let start = 0; start < n; start += len) {
      let curRe = 1;
      let curIm = 0;
      for (let k = 0; k < len / 2; k++) {
        const i = start + k;
        const j = i + len / 2;
        const tRe = re[j] * curRe - im[j] * curIm;
        const tIm = re[j] * curIm + im[j] * curRe;
        re[j] = re[i] - tRe;
        im[j] = im[i] - tIm;
        re[i] += tRe;
        im[i] += tIm;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
}

function reflectPad(x: Float32Array, pad: number): Float64Array {
  const out = new Float64Array(x.length + 2 * pad);
  for (let i = 0; i < pad; i++) out[i] = x[pad - i];
  for (let i = 0; i < x.length; i++) out[pad + i] = x[i];
  for (let i = 0; i < pad; i++) out[pad + x.length + i] = x[x.length - 2 - i];
  return out;
}

/** Power spectrogram, frames x (window/2 + 1). Center-padded (reflect). */
export function powerSpectrogram(
  samples: Float32Array,
  window: number,
  hop: number,
): { frames: number; bins: number; power: Float64Array } {
  const padded = reflectPad(samples, window / 2);
  const frames = 1 + Math.floor((padded.length - window) / hop);
  const bins = window / 2 + 1;
  const win = hannWindow(window);
  const power = new Float64Array(frames * bins);
  const re = new Float64Array(window);
  const im = new Float64Array(window);
  for (let f = 0; f < frames; f++) {
    const start = f * hop;
    for (let i = 0; i < window; i++) {
      re[i] = padded[start + i] * win[i];
      im[i] = 0;
    }
    fftComplex(re, im);
    for (let k = 0; k < bins; k++) {
      power[f * bins + k] = re[k] * re[k] + im[k] * im[k];
    }
  }
  return { frames, bins, power };
}

function hzToMel(hz: number): number {
  // Slaney scale: linear below 1 kHz, logarithmic above
  const fSp = 200.0 / 3;
  const minLogHz = 1000.0;
  const minLogMel = minLogHz / fSp;
  const logstep = Math.log(6.4) / 27.0;
  return hz < minLogHz ? hz / fSp : minLogMel + Math.log(hz / minLogHz) / logstep;
}

function melToHz(mel: number): number {
  const fSp = 200.0 / 3;
  const minLogHz = 1000.0;
  const minLogMel = minLogHz / fSp;
  const logstep = Math.log(6.4) / 27.0;
  return mel < minLogMel ? mel * fSp : minLogHz * Math.exp(logstep * (mel - minLogMel));
}

/** Slaney-normalized triangular mel filterbank, melBins x specBins. */
export function melFilterbank(cfg: MelConfig): Float64Array {
  const specBins = cfg.window / 2 + 1;
  const weights = new Float64Array(cfg.melBins * specBins);
  const fftFreqs = new Float64Array(specBins);
  for (let k = 0; k < specBins; k++) {
    fftFreqs[k] = (k * cfg.sampleRate) / cfg.window;
  }
  const melLo = hzToMel(cfg.fmin);
  const melHi = hzToMel(cfg.fmax);
  const edges = new Float64Array(cfg.melBins + 2);
  for (let m = 0; m < cfg.melBins + 2; m++) {
    edges[m] = melToHz(melLo + ((melHi - melLo) * m) / (cfg.melBins + 1));
  }
  for (let m = 0; m < cfg.melBins; m++) {
    const [lo, mid, hi] = [edges[m], edges[m + 1], edges[m + 2]];
    const norm = 2.0 / (hi - lo);
    for (let k = 0; k < specBins; k++) {
      const f = fftFreqs[k];
      const up = (f - lo) / (mid - lo);
      const down = (hi - f) / (hi - mid);
      weights[m * specBins + k] = Math.max(0, Math.min(up, down)) * norm;
    }
  }
  return weights;
}

/** Log mel-spectrogram, frames x melBins (row-major Float32Array). */
export function logMelSpectrogram(
  samples: Float32Array,
  cfg: MelConfig,
): { frames: number; mel: Float32Array } {
  const { frames, bins, power } = powerSpectrogram(samples, cfg.window, cfg.hop);
  const fb = melFilterbank(cfg);
  const mel = new Float32Array(frames * cfg.melBins);
  for (let f = 0; f < frames; f++) {
    for (let m = 0; m < cfg.melBins; m++) {
      let acc = 0;
      const wOff = m * bins;
      const pOff = f * bins;
      for (let k = 0; k < bins; k++) acc += fb[wOff + k] * power[pOff + k];
      mel[f * cfg.melBins + m] = 10 * Math.log10(Math.max(acc, 1e-10));
    }
  }
  return { frames, mel };
}
