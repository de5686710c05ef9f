"""Epoch-level kurtosis/skewness aggregation over feature tensors.

The reduction mirrors how the statistics are recorded during encoder
training: for a block with axes time x batch x channel, compute the
statistic over the channel values of each (time, batch) slice, average the
per-frame values within each batch item, then average over batch items to
get the epoch scalar.  ``FLATTEN_TIME`` is the alternative reading where
each batch item contributes one statistic over all time*channel values.

Zero-variance slices cannot be standardized; they are skipped and counted
(``degenerate_frames``) instead of poisoning the epoch with NaNs.  A batch
item with no usable slice at all is an error.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import tensor_store
from .errors import (
    AllFramesDegenerate,
    ChannelTooSmall,
    FeatstatsError,
    TrajectoryError,
)
from .moments import (
    DEFAULT_DEFINITION,
    VARIANCE_FLOOR,
    StatDefinition,
    kurtosis_from_sums,
    skewness_from_sums,
)
from .tensor_store import FeatureTensor, RunManifest


class TimeMode(enum.Enum):
    PER_FRAME = "per-frame"       # one statistic per (time, batch) slice
    FLATTEN_TIME = "flatten-time"  # one statistic per batch over time*channel


@dataclass
class EpochStat:
    """Scalar statistics for one epoch plus per-batch intermediates."""

    epoch: int
    kurtosis: float
    skewness: float
    per_batch_kurtosis: list[float]
    per_batch_skewness: list[float]
    degenerate_frames: int = 0


@dataclass
class StatTrajectory:
    """Per-epoch statistics across a training run, in epoch order."""

    stats: list[EpochStat] = field(default_factory=list)
    encoder_tag: str = ""
    definition: StatDefinition = DEFAULT_DEFINITION

    def epochs(self) -> list[int]:
        return [s.epoch for s in self.stats]

    def kurtosis_series(self) -> np.ndarray:
        return np.array([s.kurtosis for s in self.stats])

    def skewness_series(self) -> np.ndarray:
        return np.array([s.skewness for s in self.stats])


def _central_sums(x: np.ndarray, axis: int):
    """Count, mean and central power sums M2..M4 along one axis."""
    n = x.shape[axis]
    mean = x.mean(axis=axis, keepdims=True)
    d = x - mean
    d2 = d * d
    m2 = d2.sum(axis=axis)
    m3 = (d2 * d).sum(axis=axis)
    m4 = (d2 * d2).sum(axis=axis)
    return n, m2, m3, m4


def epoch_statistic(
    t: FeatureTensor,
    definition: StatDefinition = DEFAULT_DEFINITION,
    time_mode: TimeMode = TimeMode.PER_FRAME,
    epoch: int = 0,
) -> EpochStat:
    """Reduce one tensor to its epoch-level kurtosis and skewness."""
    timef, batch, chan = t.dims
    if chan < 2:
        raise ChannelTooSmall(f"need C >= 2 channels, got {chan}")
    x = t.data.astype(np.float64, copy=False)

    if time_mode is TimeMode.PER_FRAME:
        n, m2, m3, m4 = _central_sums(x, axis=2)           # (T, B)
    else:
        flat = np.swapaxes(x, 0, 1).reshape(batch, timef * chan)
        n, m2, m3, m4 = _central_sums(flat, axis=1)        # (B,)
        m2, m3, m4 = m2[None, :], m3[None, :], m4[None, :]  # 1 slice per batch

    usable = (m2 / n) >= VARIANCE_FLOOR
    degenerate = int(np.count_nonzero(~usable))

    per_batch_kurt = []
    per_batch_skew = []
    for b in range(batch):
        mask = usable[:, b]
        if not mask.any():
            raise AllFramesDegenerate(b)
        kurt = kurtosis_from_sums(n, m2[mask, b], m4[mask, b], definition.kurtosis)
        skew = skewness_from_sums(n, m2[mask, b], m3[mask, b], definition.skewness)
        per_batch_kurt.append(float(np.mean(kurt)))
        per_batch_skew.append(float(np.mean(skew)))

    # fsum makes the batch mean independent of batch order, so permuting
    # the B axis leaves the epoch scalar bit-identical
    return EpochStat(
        epoch=epoch,
        kurtosis=math.fsum(per_batch_kurt) / batch,
        skewness=math.fsum(per_batch_skew) / batch,
        per_batch_kurtosis=per_batch_kurt,
        per_batch_skewness=per_batch_skew,
        degenerate_frames=degenerate,
    )


def run_trajectory(
    manifest: RunManifest,
    definition: StatDefinition = DEFAULT_DEFINITION,
    time_mode: TimeMode = TimeMode.PER_FRAME,
    strict: bool = True,
) -> StatTrajectory:
    """One EpochStat per manifest entry; failures are tagged with the epoch."""
    stats = []
    tag = manifest.entries[0].encoder_tag if manifest.entries else ""
    for entry in manifest.entries:
        try:
            tensor = tensor_store.read_tensor_file(manifest.resolve(entry), strict=strict)
            stats.append(epoch_statistic(tensor, definition, time_mode, epoch=entry.epoch))
        except (FeatstatsError, OSError) as err:
            raise TrajectoryError(entry.epoch, str(err)) from err
    return StatTrajectory(stats, encoder_tag=tag, definition=definition)


# ---------------------------------------------------------------------------
# Stats CSV (epoch,kurtosis,skewness,degenerate_frames)

CSV_HEADER = ["epoch", "kurtosis", "skewness", "degenerate_frames"]


def write_stats_csv(trajectory: StatTrajectory, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in trajectory.stats:
        writer.writerow([s.epoch, f"{s.kurtosis:.9g}", f"{s.skewness:.9g}",
                         s.degenerate_frames])


def read_stats_csv(fh) -> list[EpochStat]:
    """Parse a stats CSV back into bare EpochStat rows (no per-batch lists)."""
    reader = csv.DictReader(fh)
    missing = set(CSV_HEADER[:3]) - set(reader.fieldnames or [])
    if missing:
        raise FeatstatsError(f"stats CSV missing column(s): {sorted(missing)}")
    rows = []
    for rec in reader:
        rows.append(EpochStat(
            epoch=int(rec["epoch"]),
            kurtosis=float(rec["kurtosis"]),
            skewness=float(rec["skewness"]),
            per_batch_kurtosis=[],
            per_batch_skewness=[],
            degenerate_frames=int(rec.get("degenerate_frames") or 0),
        ))
    return rows
