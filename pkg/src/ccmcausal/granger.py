"""Bivariate Granger-causality baseline: nested OLS autoregressions
compared with an F-test per lag order, 0.05 decision threshold.

Least squares is solved by orthogonal decomposition (numpy lstsq), never by
inverting normal equations; rank-deficient designs are flagged per lag and
the scan continues. Stationarity is the caller's responsibility (see the
preprocess module), mirroring a pipeline where the data are made stationary
before any predictive test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ccm import CausalGraph, GraphEdge
from .numerics import f_sf

__all__ = ["LagTest", "GrangerResult", "granger_test", "granger_pairwise"]

SIGNIFICANCE_THRESHOLD = 0.05

MULTIPLE_TESTING_NOTE = (
    "pairwise significance uses the minimum p-value over lags, which "
    "inflates the false-positive rate with many lags"
)


@dataclass(frozen=True)
class LagTest:
    """F-test of the lag-p unrestricted model against the restricted one."""

    lag: int
    f_statistic: float
    p_value: float
    singular: bool = False


@dataclass(frozen=True)
class GrangerResult:
    cause_name: str
    effect_name: str
    per_lag: tuple[LagTest, ...]
    significant_at: tuple[int, ...]


def _lag_matrix(values: np.ndarray, p: int, n_rows: int) -> np.ndarray:
    """Columns [x_{t-1}, ..., x_{t-p}] for the last n_rows observations."""
    cols = [values[p - i : p - i + n_rows] for i in range(1, p + 1)]
    return np.column_stack(cols)


def _rss(design: np.ndarray, y: np.ndarray) -> tuple[float, bool]:
    """Residual sum of squares from a stable least-squares fit.

    Returns (rss, singular); singular designs are reported, not raised.
    """
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        return math.nan, True
    resid = y - design @ coef
    return float(resid @ resid), False


def granger_test(cause, effect, max_lag: int) -> GrangerResult:
    """Test whether `cause` Granger-causes `effect` at lags 1..max_lag.

    Per lag p, the restricted model regresses effect_t on a constant and its
    own p lags; the unrestricted model adds p lags of the cause. The F
    statistic ((RSS_r - RSS_u)/p) / (RSS_u/(n - 2p - 1)) is referred to the
    F(p, n - 2p - 1) upper tail, with n the per-lag regression row count.
    """
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    c = np.asarray(getattr(cause, "values", cause), dtype=float)
    e = np.asarray(getattr(effect, "values", effect), dtype=float)
    if c.shape != e.shape or c.ndim != 1:
        raise ValueError("cause and effect must be aligned 1-d series")
    n_total = c.size
    if n_total < 3 * max_lag + 10:
        raise ValueError(
            f"series of length {n_total} too short for max_lag={max_lag} "
            f"(needs >= {3 * max_lag + 10})"
        )

    per_lag = []
    for p in range(1, max_lag + 1):
        n = n_total - p
        y = e[p:]
        const = np.ones((n, 1))
        own = _lag_matrix(e, p, n)
        other = _lag_matrix(c, p, n)
        restricted = np.hstack([const, own])
        unrestricted = np.hstack([const, own, other])

        rss_r, sing_r = _rss(restricted, y)
        rss_u, sing_u = _rss(unrestricted, y)
        df_denom = n - 2 * p - 1
        if sing_r or sing_u or df_denom <= 0:
            per_lag.append(LagTest(lag=p, f_statistic=math.nan,
                                   p_value=math.nan, singular=True))
            continue
        if rss_u <= 0.0:
            # Perfect unrestricted fit: infinitely strong evidence.
            per_lag.append(LagTest(lag=p, f_statistic=math.inf, p_value=0.0))
            continue
        f_stat = max(0.0, (rss_r - rss_u) / p) / (rss_u / df_denom)
        per_lag.append(LagTest(lag=p, f_statistic=f_stat,
                               p_value=f_sf(f_stat, p, df_denom)))

    significant = tuple(
        t.lag for t in per_lag
        if not t.singular and t.p_value < SIGNIFICANCE_THRESHOLD
    )
    return GrangerResult(
        cause_name=str(getattr(cause, "name", "cause")),
        effect_name=str(getattr(effect, "name", "effect")),
        per_lag=tuple(per_lag),
        significant_at=significant,
    )


def granger_pairwise(dataset, max_lag: int) -> CausalGraph:
    """Granger-test every ordered pair of a dataset.

    An edge is significant when any lag up to max_lag has p < 0.05 and is
    reported with its minimizing lag; pairs that are singular at every lag
    are reported as non-significant degenerate edges.
    """
    names = [s.name for s in dataset.series]
    if len(names) < 2:
        raise ValueError("pairwise Granger needs at least 2 series")

    edges = []
    results = []
    for a, b in itertools.permutations(names, 2):
        result = granger_test(dataset.column(a), dataset.column(b), max_lag)
        results.append(result)
        usable = [t for t in result.per_lag if not t.singular]
        if not usable:
            edges.append(GraphEdge(source=a, target=b, p_value=math.nan,
                                   rho=None, significant=False, lag=None))
            continue
        best = min(usable, key=lambda t: (t.p_value, t.lag))
        edges.append(GraphEdge(
            source=a, target=b,
            p_value=best.p_value,
            rho=None,
            significant=best.p_value < SIGNIFICANCE_THRESHOLD,
            lag=best.lag,
        ))

    significant_dirs = {(e.source, e.target) for e in edges if e.significant}
    feedback = sorted(
        {tuple(sorted((a, b))) for a, b in significant_dirs
         if (b, a) in significant_dirs}
    )
    return CausalGraph(
        nodes=tuple(names),
        edges=tuple(edges),
        feedback_pairs=tuple(feedback),
        results=tuple(results),
        notes=(MULTIPLE_TESTING_NOTE,),
    )
