from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from featstats.errors import InsufficientCount, NonFiniteInput, ZeroVariance
from featstats.moments import (
    KurtosisKind,
    MomentAccumulator,
    SkewnessKind,
    StatDefinition,
    from_array,
    merge,
)

PEARSON = StatDefinition(kurtosis=KurtosisKind.PEARSON)
FISHER = StatDefinition(kurtosis=KurtosisKind.FISHER)
SAMPLE_STD = StatDefinition(skewness=SkewnessKind.SAMPLE_STD)


def brute_force_sums(values):
    """Two-pass central power sums, independent of the streaming path."""
    x = np.asarray(values, dtype=np.float64)
    mean = x.sum() / x.size
    d = x - mean
    return x.size, mean, (d**2).sum(), (d**3).sum(), (d**4).sum()


def brute_force_kurtosis(values, fisher=True):
    n, _, m2, _, m4 = brute_force_sums(values)
    beta2 = (m4 / n) / (m2 / n) ** 2
    return beta2 - 3.0 if fisher else beta2


def brute_force_skewness(values):
    n, _, m2, m3, _ = brute_force_sums(values)
    return (m3 / n) / (m2 / n) ** 1.5


def relerr(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class TestUpdate:
    def test_single_element(self):
        acc = MomentAccumulator().add(5.0)
        assert (acc.n, acc.mean, acc.m2, acc.m3, acc.m4) == (1, 5.0, 0.0, 0.0, 0.0)

    def test_one_to_five_streamed(self):
        acc = MomentAccumulator()
        for v in [1, 2, 3, 4, 5]:
            acc.add(v)
        assert acc.n == 5
        assert acc.mean == pytest.approx(3.0, rel=1e-12)
        assert acc.m2 == pytest.approx(10.0, rel=1e-12)
        assert acc.m3 == pytest.approx(0.0, abs=1e-12)
        assert acc.m4 == pytest.approx(34.0, rel=1e-12)

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteInput):
            MomentAccumulator().add(float("nan"))
        with pytest.raises(NonFiniteInput):
            MomentAccumulator().add(float("inf"))
        with pytest.raises(NonFiniteInput):
            from_array([1.0, float("nan")])

    def test_matches_two_pass(self):
        rng = np.random.default_rng(7)
        x = rng.normal(3.0, 2.0, size=500)
        acc = MomentAccumulator()
        for v in x:
            acc.add(float(v))
        n, mean, m2, m3, m4 = brute_force_sums(x)
        assert relerr(acc.mean, mean) < 1e-9
        assert relerr(acc.m2, m2) < 1e-9
        assert relerr(acc.m4, m4) < 1e-9


class TestFromArray:
    def test_equals_sequential_add(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=777) * 10 + 4
        seq = MomentAccumulator()
        for v in x:
            seq.add(float(v))
        vec = from_array(x)
        assert vec.n == seq.n
        for a, b in [(vec.mean, seq.mean), (vec.m2, seq.m2),
                     (vec.m3, seq.m3), (vec.m4, seq.m4)]:
            assert relerr(a, b) < 1e-10 or abs(a - b) < 1e-9

    def test_empty(self):
        acc = from_array([])
        assert acc.n == 0 and acc.mean == 0.0


class TestMerge:
    def test_concatenation(self):
        a = from_array([1, 2])
        b = from_array([3, 4, 5])
        whole = from_array([1, 2, 3, 4, 5])
        got = merge(a, b)
        assert got.n == whole.n
        assert relerr(got.mean, whole.mean) < 1e-9
        assert relerr(got.m2, whole.m2) < 1e-9
        assert abs(got.m3 - whole.m3) < 1e-9
        assert relerr(got.m4, whole.m4) < 1e-9

    def test_identity_element(self):
        a = from_array([3.5, -1.0, 2.25])
        empty = MomentAccumulator()
        for got in (merge(empty, a), merge(a, empty)):
            assert (got.n, got.mean, got.m2, got.m3, got.m4) == \
                (a.n, a.mean, a.m2, a.m3, a.m4)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30),
           st.lists(st.floats(-100, 100), min_size=1, max_size=30))
    def test_commutativity(self, xs, ys):
        ab = merge(from_array(xs), from_array(ys))
        ba = merge(from_array(ys), from_array(xs))
        assert ab.n == ba.n
        for f in ("mean", "m2", "m3", "m4"):
            a, b = getattr(ab, f), getattr(ba, f)
            assert abs(a - b) <= 1e-9 * max(abs(a), abs(b), 1.0)

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=20),
           st.lists(st.floats(-50, 50), min_size=1, max_size=20),
           st.lists(st.floats(-50, 50), min_size=1, max_size=20))
    def test_associativity(self, xs, ys, zs):
        a, b, c = from_array(xs), from_array(ys), from_array(zs)
        left = merge(merge(a, b), c)
        right = merge(a, merge(b, c))
        for f in ("mean", "m2", "m3", "m4"):
            u, v = getattr(left, f), getattr(right, f)
            assert abs(u - v) <= 1e-9 * max(abs(u), abs(v), 1.0)


class TestKurtosis:
    def test_one_to_five(self):
        acc = from_array([1, 2, 3, 4, 5])
        assert acc.kurtosis(PEARSON) == pytest.approx(1.7, rel=1e-12)
        assert acc.kurtosis(FISHER) == pytest.approx(-1.3, rel=1e-12)

    def test_constant_vector(self):
        with pytest.raises(ZeroVariance):
            from_array([7.0, 7.0, 7.0]).kurtosis()

    def test_insufficient(self):
        with pytest.raises(InsufficientCount):
            from_array([1.0]).kurtosis()

    def test_standard_normal_million(self):
        rng = np.random.default_rng(123)
        acc = from_array(rng.standard_normal(10**6))
        assert abs(acc.kurtosis(FISHER)) < 0.05


class TestSkewness:
    def test_symmetric_is_zero(self):
        acc = from_array([1, 2, 3, 4, 5])
        assert acc.skewness() == pytest.approx(0.0, abs=1e-12)
        assert acc.skewness(SAMPLE_STD) == pytest.approx(0.0, abs=1e-12)

    def test_binary_vector(self):
        acc = from_array([0, 0, 0, 1])
        assert acc.skewness() == pytest.approx(2 / math.sqrt(3), rel=1e-12)

    def test_sample_std_variant(self):
        # M3 / ((n-1) s^3) scales the moment estimator by sqrt((n-1)/n)
        x = np.array([0.0, 0.0, 0.0, 1.0])
        acc = from_array(x)
        expected = brute_force_skewness(x) * math.sqrt(3 / 4)
        assert acc.skewness(SAMPLE_STD) == pytest.approx(expected, rel=1e-12)

    def test_sample_std_needs_three(self):
        with pytest.raises(InsufficientCount):
            from_array([0.0, 1.0]).skewness(SAMPLE_STD)
        assert from_array([0.0, 1.0]).skewness(StatDefinition()) == 0.0

    @given(st.lists(st.floats(-100, 100), min_size=4, max_size=50))
    def test_sign_antisymmetry(self, xs):
        x = np.asarray(xs)
        if np.ptp(x) == 0 or from_array(x).variance() < 1e-12:
            return
        s_pos = from_array(x).skewness()
        s_neg = from_array(-x).skewness()
        assert s_neg == pytest.approx(-s_pos, abs=1e-9 * max(1.0, abs(s_pos)))


class TestScaleInvariance:
    @settings(max_examples=30)
    @given(st.floats(0.01, 100), st.floats(-50, 50), st.integers(0, 2**31))
    def test_affine(self, scale, shift, seed):
        x = np.random.default_rng(seed).normal(size=200)
        base = from_array(x)
        moved = from_array(scale * x + shift)
        assert relerr(base.kurtosis(), moved.kurtosis()) < 1e-9 \
            or abs(base.kurtosis() - moved.kurtosis()) < 1e-9
        assert moved.skewness() == pytest.approx(base.skewness(), abs=1e-9)

    def test_negative_scale_flips_skewness(self):
        x = np.random.default_rng(5).exponential(size=500)
        assert from_array(-2.0 * x).skewness() == \
            pytest.approx(-from_array(x).skewness(), rel=1e-9)


class TestAnalytic:
    """Large-sample checks against closed-form distribution moments."""

    def test_exponential(self):
        rng = np.random.default_rng(1)
        acc = from_array(rng.exponential(size=10**6))
        assert acc.skewness() == pytest.approx(2.0, abs=0.02)
        assert acc.kurtosis(FISHER) == pytest.approx(6.0, abs=0.2)

    def test_uniform(self):
        rng = np.random.default_rng(2025)
        acc = from_array(rng.uniform(size=10**6))
        assert acc.kurtosis(FISHER) == pytest.approx(-1.2, abs=0.05)
