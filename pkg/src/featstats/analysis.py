"""Correlation, model ranking, and the stability-window stopping rule.

Ties the statistic trajectories to metric scores: Pearson/Spearman
correlation over the epochs both series cover, ranking of candidate
encoders by their feature statistics, and the training-termination test
that fires once both kurtosis and skewness stop moving.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import (
    ConstantSeries,
    EmptyCandidateList,
    FeatstatsError,
    InsufficientOverlap,
    LengthMismatch,
)
from .feature_stats import StatTrajectory


@dataclass
class CorrelationResult:
    method: str           # "pearson" | "spearman"
    coefficient: float
    n_points: int


@dataclass
class StopDecision:
    should_stop: bool
    stop_epoch: Optional[int]  # index into the series, None when no stop
    window: int
    epsilon: float


@dataclass
class ModelRanking:
    statistic: str                      # "kurtosis" | "skewness" | "combined"
    entries: list[tuple[str, float]]    # (encoder_tag, value), descending


def _as_series(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def pearson(x, y) -> CorrelationResult:
    """Sample Pearson correlation coefficient."""
    x, y = _as_series(x), _as_series(y)
    if x.shape != y.shape or x.size < 2:
        raise LengthMismatch(f"need equal-length series of >= 2 points, "
                             f"got {x.size} and {y.size}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ConstantSeries("correlation undefined for a constant series")
    r = float(np.corrcoef(x, y)[0, 1])
    return CorrelationResult("pearson", r, int(x.size))


def spearman(x, y) -> CorrelationResult:
    """Pearson on average-ranked data (ties share the mean of their ranks)."""
    x, y = _as_series(x), _as_series(y)
    if x.shape != y.shape or x.size < 2:
        raise LengthMismatch(f"need equal-length series of >= 2 points, "
                             f"got {x.size} and {y.size}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ConstantSeries("correlation undefined for a constant series")
    result = pearson(rankdata(x, method="average"), rankdata(y, method="average"))
    return CorrelationResult("spearman", result.coefficient, result.n_points)


_METHODS = {"pearson": pearson, "spearman": spearman}


def correlate_series(x, y, method: str = "spearman") -> CorrelationResult:
    try:
        fn = _METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; use pearson or spearman")
    return fn(x, y)


def correlate_run(
    trajectory: StatTrajectory,
    scores: Mapping[int, float],
    method: str = "spearman",
) -> dict[str, CorrelationResult]:
    """Correlate kurtosis and skewness against per-epoch scores.

    Epoch alignment takes the intersection; scores recorded at epochs the
    trajectory never saw (and vice versa) are dropped.
    """
    by_epoch = {s.epoch: s for s in trajectory.stats}
    common = sorted(set(by_epoch) & set(scores))
    if len(common) < 2:
        raise InsufficientOverlap(
            f"only {len(common)} epoch(s) shared between trajectory and scores")
    score_series = [scores[e] for e in common]
    return {
        "kurtosis": correlate_series([by_epoch[e].kurtosis for e in common],
                                     score_series, method),
        "skewness": correlate_series([by_epoch[e].skewness for e in common],
                                     score_series, method),
    }


# ---------------------------------------------------------------------------
# Model ranking


def _extract(series: Sequence[float], at) -> float:
    if at == "final":
        return series[-1]
    if at == "best":
        return max(series)
    return series[int(at)]


def rank_models(
    candidates: Sequence[tuple[str, StatTrajectory]],
    statistic: str = "combined",
    at="final",
) -> ModelRanking:
    """Order candidate encoders by a feature statistic, best first.

    ``at`` selects the epoch position: "final", "best" (per-series max), or
    an integer index.  The "combined" statistic is the mean of the
    per-candidate z-scores of kurtosis and skewness, which keeps the two on
    a common scale without preferring either.
    """
    if not candidates:
        raise EmptyCandidateList("no candidates to rank")
    if statistic not in ("kurtosis", "skewness", "combined"):
        raise ValueError(f"unknown statistic {statistic!r}")

    kurts = np.array([_extract([s.kurtosis for s in traj.stats], at)
                      for _, traj in candidates])
    skews = np.array([_extract([s.skewness for s in traj.stats], at)
                      for _, traj in candidates])

    if statistic == "kurtosis":
        values = kurts
    elif statistic == "skewness":
        values = skews
    else:
        values = (_zscores(kurts) + _zscores(skews)) / 2.0

    tags = [tag for tag, _ in candidates]
    order = sorted(range(len(tags)), key=lambda i: (-values[i], tags[i]))
    return ModelRanking(statistic, [(tags[i], float(values[i])) for i in order])


def _zscores(v: np.ndarray) -> np.ndarray:
    sd = v.std()
    if sd == 0:
        return np.zeros_like(v)
    return (v - v.mean()) / sd


# ---------------------------------------------------------------------------
# Stopping rule


def stop_check_series(
    kurtosis_series: Sequence[float],
    skewness_series: Sequence[float],
    epsilon: float = 0.05,
    window: int = 5,
) -> StopDecision:
    """First index i >= window where both series moved <= epsilon stepwise
    over the last ``window`` consecutive deltas.

    Both statistics must be stable at once; a flat kurtosis with a moving
    skewness never triggers a stop.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    k = _as_series(kurtosis_series)
    s = _as_series(skewness_series)
    if k.shape != s.shape:
        raise LengthMismatch("kurtosis and skewness series differ in length")

    dk = np.abs(np.diff(k))
    ds = np.abs(np.diff(s))
    for i in range(window, k.size):
        lo = i - window  # deltas lo..i-1 cover values at indices i-window..i
        if dk[lo:i].max() <= epsilon and ds[lo:i].max() <= epsilon:
            return StopDecision(True, i, window, epsilon)
    return StopDecision(False, None, window, epsilon)


def stop_check(
    trajectory: StatTrajectory,
    epsilon: float = 0.05,
    window: int = 5,
) -> StopDecision:
    return stop_check_series(trajectory.kurtosis_series(),
                             trajectory.skewness_series(), epsilon, window)


# ---------------------------------------------------------------------------
# Scores CSV (epoch,spider[,other metrics...])


def read_scores_csv(fh) -> dict[str, dict[int, float]]:
    """Metric name -> {epoch -> value}; blank cells are skipped."""
    reader = csv.DictReader(fh)
    fields = reader.fieldnames or []
    if "epoch" not in fields:
        raise FeatstatsError("scores CSV must have an 'epoch' column")
    metrics = [f for f in fields if f != "epoch"]
    out: dict[str, dict[int, float]] = {m: {} for m in metrics}
    for rec in reader:
        epoch = int(rec["epoch"])
        for m in metrics:
            cell = (rec.get(m) or "").strip()
            if cell:
                out[m][epoch] = float(cell)
    return out
