/** Error types surfaced by the extractor. */

export class CheckpointMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CheckpointMismatch";
  }
}

export class AudioDecodeError extends Error {
  constructor(file: string, message: string) {
    super(`${file}: ${message}`);
    this.name = "AudioDecodeError";
  }
}

export class EmptyAudioDir extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptyAudioDir";
  }
}

/** Extraction of one epoch in a series failed; earlier epochs were written. */
export class EpochExtractionError extends Error {
  readonly epoch: number;

  constructor(epoch: number, cause: Error) {
    super(`epoch ${epoch}: ${cause.message}`);
    this.name = "EpochExtractionError";
    this.epoch = epoch;
  }
}
