"""Binary interchange format for feature tensors plus JSONL run manifests.

A feature tensor is one epoch's extracted encoder activation block with
axes time x batch x channel.  The on-disk layout (extension ``.fst``) is:

    magic  b"FSTF"            4 bytes
    version u16 = 1           little-endian
    dtype   u8                1 = float32, 2 = float64
    ndim    u8 = 3
    T, B, C u64 each          little-endian
    payload                   T*B*C elements, row-major (t*B*C + b*C + c)

A run manifest is UTF-8 JSON lines, one entry per epoch:

    {"epoch": 0, "tensor": "ep000.fst", "scores": {"spider": 0.1}, "encoder": "cnn10"}

``scores`` and ``encoder`` are optional; epochs must be strictly increasing;
``tensor`` paths resolve relative to the manifest file's directory.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Optional

import numpy as np

from .errors import (
    BadMagic,
    DimOverflow,
    MalformedLine,
    NonFinite,
    NonMonotonicEpochs,
    TruncatedData,
    UnsupportedVersion,
)

MAGIC = b"FSTF"
VERSION = 1
HEADER_STRUCT = struct.Struct("<4sHBB3Q")
HEADER_SIZE = HEADER_STRUCT.size  # 32 bytes

_DTYPE_CODES = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}
_CODE_DTYPES = {1: np.dtype(np.float32), 2: np.dtype(np.float64)}

# Reject dimension products whose byte size cannot be addressed.
_MAX_BYTES = 2**63 - 1


@dataclass
class FeatureTensor:
    """One epoch's activation block, shape (time, batch, channel)."""

    data: np.ndarray
    nonfinite_count: int = 0  # populated by lenient reads

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise ValueError(f"feature tensor must be 3-D, got ndim={self.data.ndim}")
        if self.data.dtype not in _DTYPE_CODES:
            raise ValueError(f"unsupported dtype {self.data.dtype}; use float32/float64")
        if min(self.data.shape) < 1:
            raise ValueError(f"all dims must be >= 1, got {self.data.shape}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]


def write_tensor(t: FeatureTensor, destination: BinaryIO) -> int:
    """Serialize a tensor; returns the number of bytes written."""
    timef, batch, chan = t.dims
    header = HEADER_STRUCT.pack(MAGIC, VERSION, _DTYPE_CODES[t.data.dtype], 3,
                                timef, batch, chan)
    payload = np.ascontiguousarray(t.data).tobytes()
    destination.write(header)
    destination.write(payload)
    return len(header) + len(payload)


def write_tensor_file(t: FeatureTensor, path) -> int:
    with open(path, "wb") as fh:
        return write_tensor(t, fh)


def read_tensor(source: BinaryIO, strict: bool = True) -> FeatureTensor:
    """Parse a tensor stream; validates header and payload.

    In strict mode (default) any NaN/Inf element raises :class:`NonFinite`;
    in lenient mode the tensor is returned with ``nonfinite_count`` set.
    """
    head = source.read(HEADER_SIZE)
    if len(head) < 4 or head[:4] != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, got {head[:4]!r}")
    if len(head) < HEADER_SIZE:
        raise TruncatedData(f"header is {len(head)} bytes, need {HEADER_SIZE}")
    _, version, dtype_code, ndim, timef, batch, chan = HEADER_STRUCT.unpack(head)
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}, reader supports {VERSION}")
    if dtype_code not in _CODE_DTYPES:
        raise UnsupportedVersion(f"unknown dtype code {dtype_code}")
    if ndim != 3:
        raise UnsupportedVersion(f"ndim {ndim}, this format is rank-3 only")
    if min(timef, batch, chan) < 1:
        raise TruncatedData(f"dims must be >= 1, got {(timef, batch, chan)}")

    dtype = _CODE_DTYPES[dtype_code]
    count = timef * batch * chan
    if count * dtype.itemsize > _MAX_BYTES:
        raise DimOverflow(f"{timef}x{batch}x{chan} elements exceed addressable size")

    payload = source.read(count * dtype.itemsize)
    if len(payload) < count * dtype.itemsize:
        raise TruncatedData(
            f"payload has {len(payload)} bytes, need {count * dtype.itemsize}")

    data = np.frombuffer(payload, dtype=dtype).reshape(timef, batch, chan)
    bad = int(np.count_nonzero(~np.isfinite(data)))
    if bad and strict:
        raise NonFinite(f"{bad} non-finite element(s); use lenient mode to accept")
    return FeatureTensor(data.copy(), nonfinite_count=bad)


def read_tensor_file(path, strict: bool = True) -> FeatureTensor:
    with open(path, "rb") as fh:
        return read_tensor(fh, strict=strict)


# ---------------------------------------------------------------------------
# Run manifest


@dataclass
class ManifestEntry:
    epoch: int
    tensor_path: str
    scores: Optional[dict[str, float]] = None
    encoder_tag: str = ""


@dataclass
class RunManifest:
    """Ordered per-epoch entries linking tensor files and metric scores."""

    entries: list[ManifestEntry] = field(default_factory=list)
    root: Path = Path(".")  # directory tensor paths resolve against

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.tensor_path

    def epochs(self) -> list[int]:
        return [e.epoch for e in self.entries]

    def score_series(self, metric: str) -> dict[int, float]:
        """Epoch -> score map for one metric, skipping unscored epochs."""
        out = {}
        for e in self.entries:
            if e.scores and metric in e.scores:
                out[e.epoch] = e.scores[metric]
        return out


def _check_epochs(entries: list[ManifestEntry]):
    for prev, cur in zip(entries, entries[1:]):
        if cur.epoch <= prev.epoch:
            raise NonMonotonicEpochs(
                f"epoch {cur.epoch} follows {prev.epoch}; must be strictly increasing")


def load_manifest(path) -> RunManifest:
    path = Path(path)
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedLine(lineno, f"invalid JSON: {err}") from err
            if not isinstance(obj, dict):
                raise MalformedLine(lineno, "entry must be a JSON object")
            try:
                epoch = int(obj["epoch"])
                tensor = str(obj["tensor"])
            except (KeyError, TypeError, ValueError) as err:
                raise MalformedLine(lineno, f"missing/invalid key: {err}") from err
            if epoch < 0:
                raise MalformedLine(lineno, f"epoch must be non-negative, got {epoch}")
            scores = obj.get("scores")
            if scores is not None:
                if not isinstance(scores, dict):
                    raise MalformedLine(lineno, "scores must be an object")
                scores = {str(k): float(v) for k, v in scores.items()}
            entries.append(ManifestEntry(epoch, tensor, scores,
                                         str(obj.get("encoder", ""))))
    _check_epochs(entries)
    return RunManifest(entries, root=path.parent)


def save_manifest(manifest: RunManifest, path) -> None:
    _check_epochs(manifest.entries)
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            obj: dict = {"epoch": e.epoch, "tensor": e.tensor_path}
            if e.scores is not None:
                obj["scores"] = e.scores
            if e.encoder_tag:
                obj["encoder"] = e.encoder_tag
            fh.write(json.dumps(obj) + "\n")
