"""Single-pass, mergeable estimation of mean and 2nd-4th central moments.

An accumulator carries ``(n, mean, m2, m3, m4)`` where ``mk`` is the running
central power sum ``sum((x - mean)**k)``.  Updates use the numerically stable
incremental recurrences (the Welford/Pebay form) rather than raw power sums,
which cancel catastrophically for data with large means.  Two accumulators
can be merged exactly, so arrays may be reduced in parallel or chunked
arbitrarily without changing the result beyond rounding.

Kurtosis and skewness come in the two conventions that show up in practice:

* kurtosis: ``PEARSON`` is the raw fourth standardized moment m4/m2**2
  (3.0 for a normal); ``FISHER`` subtracts 3 so the normal sits at zero.
* skewness: ``BIASED`` is the plain moment estimator g1 = m3/m2**1.5;
  ``SAMPLE_STD`` normalizes by the (N-1)-denominator sample standard
  deviation instead, i.e. M3 / ((N-1) * s**3).

The default (FISHER + BIASED) matches ``scipy.stats.kurtosis``/``skew``
defaults.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientCount, NonFiniteInput, ZeroVariance

# Variance (m2/n) below this is treated as zero: the standardized moments
# are undefined and callers decide whether to skip or fail.
VARIANCE_FLOOR = 1e-30


class KurtosisKind(enum.Enum):
    PEARSON = "pearson-beta2"   # m4 / m2**2
    FISHER = "fisher"           # m4 / m2**2 - 3


class SkewnessKind(enum.Enum):
    BIASED = "biased"           # g1 = m3 / m2**1.5
    SAMPLE_STD = "sample-std"   # M3 / ((n-1) * s**3), s**2 = M2/(n-1)


@dataclass(frozen=True)
class StatDefinition:
    """Which estimator convention to use for each statistic."""

    kurtosis: KurtosisKind = KurtosisKind.FISHER
    skewness: SkewnessKind = SkewnessKind.BIASED


DEFAULT_DEFINITION = StatDefinition()


def kurtosis_from_sums(n, m2_sum, m4_sum, kind: KurtosisKind):
    """Kurtosis from central power sums; ufunc-friendly (no validity checks)."""
    m2 = m2_sum / n
    m4 = m4_sum / n
    value = m4 / (m2 * m2)
    if kind is KurtosisKind.FISHER:
        value = value - 3.0
    return value


def skewness_from_sums(n, m2_sum, m3_sum, kind: SkewnessKind):
    """Skewness from central power sums; ufunc-friendly (no validity checks)."""
    if kind is SkewnessKind.BIASED:
        m2 = m2_sum / n
        return (m3_sum / n) / m2**1.5
    # sample-std variant: M3 / ((n-1) * s**3) with s**2 = M2/(n-1)
    s2 = m2_sum / (n - 1)
    return m3_sum / ((n - 1) * s2**1.5)


@dataclass
class MomentAccumulator:
    """Running count, mean and central power sums M2, M3, M4."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    def add(self, x: float) -> "MomentAccumulator":
        """Fold one value into the accumulator (in place; returns self)."""
        if not math.isfinite(x):
            raise NonFiniteInput(f"cannot accumulate non-finite value {x!r}")
        n0 = self.n
        self.n = n = n0 + 1
        delta = x - self.mean
        delta_n = delta / n
        delta_n2 = delta_n * delta_n
        term = delta * delta_n * n0
        self.mean += delta_n
        self.m4 += (term * delta_n2 * (n * n - 3 * n + 3)
                    + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3)
        self.m3 += term * delta_n * (n - 2) - 3.0 * delta_n * self.m2
        self.m2 += term
        return self

    def add_values(self, values) -> "MomentAccumulator":
        """Fold an array of values via a pairwise merge reduction."""
        other = from_array(values)
        merged = merge(self, other)
        self.n, self.mean = merged.n, merged.mean
        self.m2, self.m3, self.m4 = merged.m2, merged.m3, merged.m4
        return self

    def kurtosis(self, definition: StatDefinition = DEFAULT_DEFINITION) -> float:
        if self.n < 2:
            raise InsufficientCount(f"kurtosis needs n >= 2, have {self.n}")
        self._require_variance()
        return float(kurtosis_from_sums(self.n, self.m2, self.m4, definition.kurtosis))

    def skewness(self, definition: StatDefinition = DEFAULT_DEFINITION) -> float:
        minimum = 2 if definition.skewness is SkewnessKind.BIASED else 3
        if self.n < minimum:
            raise InsufficientCount(
                f"{definition.skewness.value} skewness needs n >= {minimum}, have {self.n}")
        self._require_variance()
        return float(skewness_from_sums(self.n, self.m2, self.m3, definition.skewness))

    def variance(self) -> float:
        """Population variance m2 = M2/n."""
        if self.n < 1:
            raise InsufficientCount("variance needs n >= 1")
        return self.m2 / self.n

    def _require_variance(self):
        if self.m2 / self.n < VARIANCE_FLOOR:
            raise ZeroVariance(f"variance {self.m2 / self.n:.3e} below floor")


def merge(a: MomentAccumulator, b: MomentAccumulator) -> MomentAccumulator:
    """Combine two accumulators; equals accumulating the concatenated data."""
    if a.n == 0:
        return MomentAccumulator(b.n, b.mean, b.m2, b.m3, b.m4)
    if b.n == 0:
        return MomentAccumulator(a.n, a.mean, a.m2, a.m3, a.m4)
    na, nb = a.n, b.n
    n = na + nb
    delta = b.mean - a.mean
    delta2 = delta * delta
    mean = a.mean + delta * nb / n
    m2 = a.m2 + b.m2 + delta2 * na * nb / n
    m3 = (a.m3 + b.m3
          + delta * delta2 * na * nb * (na - nb) / (n * n)
          + 3.0 * delta * (na * b.m2 - nb * a.m2) / n)
    m4 = (a.m4 + b.m4
          + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
          + 6.0 * delta2 * (na * na * b.m2 + nb * nb * a.m2) / (n * n)
          + 4.0 * delta * (na * b.m3 - nb * a.m3) / n)
    return MomentAccumulator(n, mean, m2, m3, m4)


def from_array(values) -> MomentAccumulator:
    """Accumulate a whole array with a vectorized pairwise merge tree.

    Every element starts as a singleton accumulator; adjacent pairs are
    merged level by level.  This is the same mergeable recurrence as
    :func:`merge`, applied elementwise on numpy arrays, and inherits the
    accuracy of pairwise summation.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        return MomentAccumulator()
    if not np.isfinite(x).all():
        raise NonFiniteInput("input array contains NaN or Inf")

    n = np.ones(x.size)
    mean = x.copy()
    m2 = np.zeros(x.size)
    m3 = np.zeros(x.size)
    m4 = np.zeros(x.size)

    while n.size > 1:
        pairs = n.size // 2
        na, nb = n[0:2 * pairs:2], n[1:2 * pairs:2]
        ma, mb = mean[0:2 * pairs:2], mean[1:2 * pairs:2]
        m2a, m2b = m2[0:2 * pairs:2], m2[1:2 * pairs:2]
        m3a, m3b = m3[0:2 * pairs:2], m3[1:2 * pairs:2]
        m4a, m4b = m4[0:2 * pairs:2], m4[1:2 * pairs:2]

        nn = na + nb
        delta = mb - ma
        delta2 = delta * delta
        new_mean = ma + delta * nb / nn
        new_m2 = m2a + m2b + delta2 * na * nb / nn
        new_m3 = (m3a + m3b
                  + delta * delta2 * na * nb * (na - nb) / (nn * nn)
                  + 3.0 * delta * (na * m2b - nb * m2a) / nn)
        new_m4 = (m4a + m4b
                  + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (nn * nn * nn)
                  + 6.0 * delta2 * (na * na * m2b + nb * nb * m2a) / (nn * nn)
                  + 4.0 * delta * (na * m3b - nb * m3a) / nn)

        if n.size % 2:  # odd tail carries to the next level
            nn = np.append(nn, n[-1])
            new_mean = np.append(new_mean, mean[-1])
            new_m2 = np.append(new_m2, m2[-1])
            new_m3 = np.append(new_m3, m3[-1])
            new_m4 = np.append(new_m4, m4[-1])
        n, mean, m2, m3, m4 = nn, new_mean, new_m2, new_m3, new_m4

    return MomentAccumulator(int(n[0]), float(mean[0]),
                             float(m2[0]), float(m3[0]), float(m4[0]))
