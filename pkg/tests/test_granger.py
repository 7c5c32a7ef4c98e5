"""Granger baseline: F-test correctness, null calibration, chain detection."""

import math

import numpy as np
import pytest

from ccmcausal.dataset import MultivariateDataset, TimeSeries
from ccmcausal.granger import granger_pairwise, granger_test
from ccmcausal.numerics import RandomStream

from conftest import as_series


def linear_chain(n, seed, coef=0.9, noise=1.0):
    """y_t = coef * x_{t-1} + noise; x white."""
    stream = RandomStream(7000, seed)
    x = stream.derive(1).normal(size=n)
    e = stream.derive(2).normal(0.0, noise, size=n)
    y = np.empty(n)
    y[0] = e[0]
    y[1:] = coef * x[:-1] + e[1:]
    return x, y


class TestGrangerTest:
    def test_perfect_one_lag_predictor(self):
        stream = RandomStream(1, 0)
        x = stream.normal(size=500)
        y = np.empty(500)
        y[0] = 0.0
        y[1:] = x[:-1]
        res = granger_test(as_series("x", x), as_series("y", y), max_lag=1)
        assert res.per_lag[0].p_value < 1e-10
        assert 1 in res.significant_at

    def test_null_false_positive_rate(self):
        fp = 0
        trials = 200
        for i in range(trials):
            stream = RandomStream(8000, i)
            a = stream.derive(1).normal(size=1000)
            b = stream.derive(2).normal(size=1000)
            res = granger_test(as_series("a", a), as_series("b", b), max_lag=1)
            fp += res.per_lag[0].p_value < 0.05
        rate = fp / trials
        assert 0.03 <= rate <= 0.07

    def test_statsmodels_agreement(self):
        statsmodels = pytest.importorskip("statsmodels.tsa.stattools")
        x, y = linear_chain(400, seed=3)
        res = granger_test(as_series("x", x), as_series("y", y), max_lag=3)
        sm_out = statsmodels.grangercausalitytests(
            np.column_stack([y, x]), maxlag=3, verbose=False)
        for lag in (1, 2, 3):
            f_sm, p_sm, _, _ = sm_out[lag][0]["ssr_ftest"]
            mine = res.per_lag[lag - 1]
            assert mine.f_statistic == pytest.approx(f_sm, rel=1e-6)
            assert mine.p_value == pytest.approx(p_sm, abs=1e-8)

    def test_affine_invariance(self):
        x, y = linear_chain(300, seed=4)
        base = granger_test(as_series("x", x), as_series("y", y), 2)
        scaled = granger_test(as_series("x", 5.0 * x - 3.0),
                              as_series("y", 0.2 * y + 11.0), 2)
        for t1, t2 in zip(base.per_lag, scaled.per_lag):
            assert t1.f_statistic == pytest.approx(t2.f_statistic, abs=1e-8)

    def test_nested_models_f_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = rng.normal(size=120)
            b = rng.normal(size=120)
            res = granger_test(as_series("a", a), as_series("b", b), 3)
            for t in res.per_lag:
                assert t.singular or t.f_statistic >= 0.0

    def test_insufficient_length(self):
        with pytest.raises(ValueError, match="too short"):
            granger_test(as_series("a", np.arange(20.0)),
                         as_series("b", np.arange(20.0)), max_lag=12)

    def test_identical_series_singular(self):
        x = RandomStream(2, 0).normal(size=200)
        res = granger_test(as_series("a", x), as_series("b", x), max_lag=2)
        assert all(t.singular for t in res.per_lag)
        assert res.significant_at == ()

    def test_ols_matches_normal_equations_oracle(self):
        # Well-conditioned random systems: lstsq vs explicit normal equations.
        rng = np.random.default_rng(6)
        for _ in range(20):
            X = rng.normal(size=(80, 5))
            beta = rng.normal(size=5)
            y = X @ beta + 0.1 * rng.normal(size=80)
            qr_coef, *_ = np.linalg.lstsq(X, y, rcond=None)
            ne_coef = np.linalg.solve(X.T @ X, X.T @ y)
            assert np.allclose(qr_coef, ne_coef, rtol=1e-8)


class TestGrangerPairwise:
    def make_dataset(self, n=600, seed=0):
        x, y = linear_chain(n, seed=seed)
        z = RandomStream(9000, seed).derive(3).normal(size=n)
        t = range(1, n + 1)
        return MultivariateDataset(series=(
            TimeSeries("x", x, t), TimeSeries("y", y, t), TimeSeries("z", z, t),
        ))

    def test_chain_direction(self):
        detections = 0
        trials = 20
        for i in range(trials):
            x, y = linear_chain(600, seed=100 + i)
            t = range(1, 601)
            ds = MultivariateDataset(series=(TimeSeries("x", x, t),
                                             TimeSeries("y", y, t)))
            graph = granger_pairwise(ds, max_lag=1)
            edges = {(e.source, e.target): e.significant for e in graph.edges}
            if edges[("x", "y")] and not edges[("y", "x")]:
                detections += 1
        assert detections / trials >= 0.9

    def test_all_ordered_pairs_tested(self):
        ds = self.make_dataset()
        graph = granger_pairwise(ds, max_lag=2)
        assert len(graph.edges) == 6
        assert len(graph.results) == 6

    def test_minimizing_lag_reported(self):
        ds = self.make_dataset()
        graph = granger_pairwise(ds, max_lag=3)
        for edge in graph.edges:
            if edge.significant:
                assert edge.lag in (1, 2, 3)

    def test_identical_pair_degenerate(self):
        x = RandomStream(3, 0).normal(size=300)
        t = range(1, 301)
        ds = MultivariateDataset(series=(TimeSeries("a", x, t),
                                         TimeSeries("b", x.copy(), t)))
        graph = granger_pairwise(ds, max_lag=2)
        for edge in graph.edges:
            assert not edge.significant
            assert math.isnan(edge.p_value)

    def test_multiple_testing_note_present(self):
        ds = self.make_dataset()
        graph = granger_pairwise(ds, max_lag=2)
        assert any("inflates" in note for note in graph.notes)

    def test_independent_noise_base_rate(self):
        # Min-p over m lags inflates the per-edge rate above the nominal 5%,
        # bounded by the independent-tests ceiling 1 - 0.95^m (per-lag tests
        # share data, so the true rate sits between the two).
        edges_total = 0
        edges_sig = 0
        for trial in range(10):
            stream = RandomStream(12000, trial)
            t = range(1, 801)
            ds = MultivariateDataset(series=tuple(
                TimeSeries(f"v{i}", stream.derive(i).normal(size=800), t)
                for i in range(6)
            ))
            graph = granger_pairwise(ds, max_lag=3)
            edges_total += len(graph.edges)
            edges_sig += sum(e.significant for e in graph.edges)
        rate = edges_sig / edges_total
        ceiling = 1.0 - 0.95 ** 3
        assert 0.03 <= rate <= ceiling + 0.04
