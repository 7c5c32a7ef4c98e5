"""Preprocessing pipeline: ADF, split diagnostics, decomposition, smoothing,
standardization."""

import math

import numpy as np
import pytest

from ccmcausal.numerics import RandomStream
from ccmcausal.preprocess import (adf_test, apply_pipeline, decompose_additive,
                                  deseasonalize, exp_smooth,
                                  split_summary_test, standardize,
                                  stationarity_report)

from conftest import as_series


class TestAdf:
    def test_unit_root_null_rate(self):
        # Random walks: rejection should be ~5% at the 5% critical value.
        rejections = 0
        trials = 500
        for i in range(trials):
            steps = RandomStream(1000, i).normal(size=2000)
            walk = np.cumsum(steps)
            rejections += adf_test(walk, lag_order=1).reject_5pct
        rate = rejections / trials
        assert 0.02 <= rate <= 0.08

    def test_white_noise_power(self):
        rejections = 0
        trials = 500
        for i in range(trials):
            noise = RandomStream(2000, i).normal(size=2000)
            rejections += adf_test(noise, lag_order=1).reject_5pct
        assert rejections / trials >= 0.95

    def test_constant_series_error(self):
        with pytest.raises(ValueError, match="singular|constant"):
            adf_test(np.full(100, 3.0))

    def test_too_short(self):
        with pytest.raises(ValueError, match="too short"):
            adf_test(np.arange(8.0), lag_order=1)

    def test_statsmodels_agreement(self):
        # Same regression as statsmodels adfuller(maxlag=k, autolag=None).
        statsmodels = pytest.importorskip("statsmodels.tsa.stattools")
        rng = np.random.default_rng(8)
        x = np.cumsum(rng.normal(size=500)) + 0.1 * rng.normal(size=500)
        for lag in (0, 1, 4):
            expected = statsmodels.adfuller(x, maxlag=lag, autolag=None)[0]
            assert adf_test(x, lag_order=lag).statistic == pytest.approx(
                expected, abs=1e-8)


class TestSplitSummary:
    def test_identical_halves(self):
        r = split_summary_test([1.0, 1.0, 1.0, 1.0])
        assert r.mean_gap == 0.0
        assert r.constant_half

    def test_mean_shift(self):
        r = split_summary_test([0.0, 0.0, 10.0, 10.0])
        assert r.mean_gap > 1.0
        assert r.variance_ratio == 1.0
        assert r.constant_half

    def test_white_noise_small_gap(self):
        noise = RandomStream(77, 0).normal(size=10_000)
        r = split_summary_test(noise)
        assert r.mean_gap < 0.05
        assert r.variance_ratio < 1.1
        assert not r.constant_half

    def test_too_short(self):
        with pytest.raises(ValueError):
            split_summary_test([1.0, 2.0, 3.0])


class TestDecompose:
    def test_constant_series(self):
        r = decompose_additive(np.full(40, 7.0), period=4)
        assert np.allclose(r.seasonal, 0.0, atol=1e-12)
        defined = np.isfinite(r.trend)
        assert np.allclose(r.trend[defined], 7.0)
        assert np.allclose(r.residual[defined], 0.0, atol=1e-12)

    def test_sinusoid_recovery(self):
        # Period-12 sinusoid plus linear trend; seasonal component should be
        # recovered almost exactly on interior points.
        n = 240
        t = np.arange(n)
        seasonal_true = np.sin(2 * np.pi * t / 12)
        x = seasonal_true + 0.1 * t
        r = decompose_additive(x, period=12)
        interior = np.isfinite(r.trend)
        rmse = np.sqrt(np.mean((r.seasonal[interior]
                                - seasonal_true[interior]) ** 2))
        assert rmse < 0.05

    def test_reconstruction_invariant(self):
        rng = np.random.default_rng(4)
        for period in (3, 4, 7, 12):
            x = rng.normal(size=10 * period)
            r = decompose_additive(x, period)
            defined = np.isfinite(r.trend)
            recon = r.trend[defined] + r.seasonal[defined] + r.residual[defined]
            assert np.allclose(recon, x[defined], atol=1e-9)
            assert abs(r.seasonal[:period].sum()) < 1e-9

    def test_edge_nan_count(self):
        r = decompose_additive(np.random.default_rng(1).normal(size=50), 12)
        assert np.isnan(r.trend[:6]).all()
        assert np.isnan(r.trend[-6:]).all()
        assert np.isfinite(r.trend[6:-6]).all()

    def test_length_error(self):
        with pytest.raises(ValueError, match="too short"):
            decompose_additive(np.arange(6.0), period=5)


class TestDeseasonalize:
    def test_constant_unchanged(self):
        x = np.full(30, 2.5)
        assert np.allclose(deseasonalize(x, 5), x, atol=1e-12)

    def test_sinusoid_residual_reduction(self):
        n = 240
        t = np.arange(n)
        x = np.sin(2 * np.pi * t / 12) + 0.01 * np.random.default_rng(2).normal(size=n)
        out = deseasonalize(x, 12)
        interior = slice(6, -6)
        before = np.sqrt(np.mean(x[interior] ** 2))
        after = np.sqrt(np.mean(out[interior] ** 2))
        assert after <= 0.1 * before

    def test_idempotent_seasonal_indexes(self):
        n = 240
        t = np.arange(n)
        x = np.sin(2 * np.pi * t / 12) + 0.05 * t
        once = deseasonalize(x, 12)
        r = decompose_additive(once, 12)
        assert np.all(np.abs(r.seasonal[:12]) < 1e-6)

    def test_preserves_series_wrapper(self):
        s = as_series("x", np.sin(np.arange(48) * 2 * np.pi / 12))
        out = deseasonalize(s, 12)
        assert out.name == "x"
        assert out.time_index == s.time_index


class TestExpSmooth:
    def test_alpha_one_identity(self):
        x = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
        assert np.array_equal(exp_smooth(x, 1.0), x)

    def test_constant_fixed_point(self):
        x = np.full(20, 2.2)
        assert np.allclose(exp_smooth(x, 0.3), x, atol=1e-15)

    def test_hand_computation(self):
        out = exp_smooth(np.array([0.0, 1.0]), 0.2)
        assert out.tolist() == [0.0, 0.2]

    def test_range_contained(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=500)
        out = exp_smooth(x, 0.4)
        assert out.min() >= x.min() - 1e-12
        assert out.max() <= x.max() + 1e-12

    def test_alpha_out_of_range(self):
        for alpha in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                exp_smooth(np.arange(5.0), alpha)


class TestStandardize:
    def test_hand_values(self):
        out = standardize(np.array([1.0, 2.0, 3.0]))
        expected = [-1.224745, 0.0, 1.224745]
        assert np.allclose(out, expected, atol=1e-6)

    def test_contract(self):
        rng = np.random.default_rng(11)
        x = rng.normal(3.0, 7.0, size=1000)
        out = standardize(x)
        assert abs(out.mean()) < 1e-9
        assert abs(out.std() - 1.0) < 1e-9

    def test_idempotent(self):
        x = standardize(np.random.default_rng(12).normal(size=100))
        again = standardize(x)
        assert np.allclose(again, x, atol=1e-9)

    def test_affine_invariance(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=200)
        for a, b in ((2.0, 5.0), (0.1, -3.0), (7.5, 0.0)):
            assert np.allclose(standardize(a * x + b), standardize(x), atol=1e-9)

    def test_constant_error(self):
        with pytest.raises(ValueError, match="constant"):
            standardize(np.full(10, 5.0))


class TestStationarityReport:
    def test_white_noise_stationary(self):
        noise = RandomStream(55, 0).normal(size=2000)
        rep = stationarity_report(noise)
        assert rep.verdict == "stationary"
        assert rep.adf_reject_5pct

    def test_random_walk_nonstationary(self):
        walk = np.cumsum(RandomStream(56, 0).normal(size=2000))
        rep = stationarity_report(walk)
        assert rep.verdict in ("nonstationary", "inconclusive")
        assert not rep.adf_reject_5pct

    def test_constant_inconclusive(self):
        rep = stationarity_report(np.full(100, 1.0))
        assert rep.verdict == "inconclusive"
        assert math.isnan(rep.adf_statistic)


class TestPipeline:
    def test_composition_matches_stages(self):
        rng = np.random.default_rng(21)
        t = np.arange(480)
        x = np.sin(2 * np.pi * t / 12) + 0.01 * t + rng.normal(size=480)
        via_pipeline = apply_pipeline(x, period=12, alpha=0.2, zscore=True)
        by_hand = standardize(exp_smooth(deseasonalize(x, 12), 0.2))
        assert np.allclose(via_pipeline, by_hand, atol=1e-9)
