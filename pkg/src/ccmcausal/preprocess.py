"""Stationarity testing and series conditioning: augmented Dickey-Fuller
test (constant-included regression, embedded large-sample critical values),
split-half summary diagnostics, additive seasonal decomposition,
deseasonalization, exponential smoothing, and z-score standardization.

The full pipeline order is deseasonalize -> exponential smoothing ->
standardize. The four classical components trend/cycle/season/noise are
handled with a three-component additive model: the cyclical component is
absorbed into the moving-average trend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataset import TimeSeries

__all__ = [
    "ADF_CRITICAL_VALUES",
    "AdfResult",
    "SplitSummary",
    "DecompositionResult",
    "StationarityReport",
    "adf_test",
    "split_summary_test",
    "decompose_additive",
    "deseasonalize",
    "exp_smooth",
    "standardize",
    "stationarity_report",
    "apply_pipeline",
]

# Large-sample critical values for the constant-only Dickey-Fuller regression.
ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}

# Split-half diagnostics beyond these bounds count against stationarity.
MEAN_GAP_MAX = 0.5
VARIANCE_RATIO_MAX = 2.0


class AdfResult(NamedTuple):
    statistic: float
    reject_5pct: bool


class SplitSummary(NamedTuple):
    mean_gap: float
    variance_ratio: float
    constant_half: bool


@dataclass(frozen=True)
class DecompositionResult:
    """Additive decomposition x = trend + seasonal + residual.

    trend and residual are NaN in the first/last floor(period/2) positions
    where the centered moving average is undefined; seasonal indexes sum to
    zero over one period.
    """

    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    period: int


@dataclass(frozen=True)
class StationarityReport:
    adf_statistic: float
    adf_reject_5pct: bool
    split_mean_gap: float
    split_variance_ratio: float
    verdict: str  # "stationary" | "nonstationary" | "inconclusive"


def _values(x) -> np.ndarray:
    arr = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {arr.shape}")
    return arr


def _like(x, values: np.ndarray):
    """Wrap result values as a TimeSeries when the input was one."""
    if isinstance(x, TimeSeries):
        return TimeSeries(name=x.name, values=values, time_index=x.time_index)
    return values


def adf_test(x, lag_order: int = 1) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant, no trend term.

    Regresses dx_t on [const, x_{t-1}, dx_{t-1}, ..., dx_{t-lag_order}] and
    returns the t-ratio on the lagged level; the unit-root null is rejected
    at 5% when the statistic falls below -2.86.
    """
    if lag_order < 0:
        raise ValueError("lag_order must be >= 0")
    values = _values(x)
    n = values.size
    if n < lag_order + 10:
        raise ValueError(
            f"series of length {n} too short for lag_order={lag_order} "
            f"(needs >= {lag_order + 10})"
        )
    if np.ptp(values) == 0.0:
        raise ValueError("constant series: ADF regression is singular")

    dx = np.diff(values)
    rows = dx.size - lag_order
    y = dx[lag_order:]
    design = [np.ones(rows), values[lag_order : lag_order + rows]]
    for i in range(1, lag_order + 1):
        design.append(dx[lag_order - i : lag_order - i + rows])
    X = np.column_stack(design)

    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if np.any(diag < 1e-12 * max(1.0, diag.max())):
        raise ValueError("singular ADF regression")
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - X @ coef
    dof = rows - X.shape[1]
    if dof <= 0:
        raise ValueError("not enough observations for the ADF regression")
    sigma2 = float(resid @ resid) / dof
    r_inv = np.linalg.inv(r)
    se_level = math.sqrt(sigma2 * float(np.sum(r_inv[1] ** 2)))
    statistic = float(coef[1]) / se_level
    return AdfResult(statistic=statistic,
                     reject_5pct=statistic < ADF_CRITICAL_VALUES["5%"])


def split_summary_test(x) -> SplitSummary:
    """Compare the two halves of a series.

    mean_gap is |mean1 - mean2| over the pooled standard deviation;
    variance_ratio is max/min of the half variances. Constant halves set the
    flag; the ratio is 1 when both halves are constant and infinite when
    only one is, and a zero pooled deviation makes mean_gap 0 or infinite
    depending on whether the means agree.
    """
    values = _values(x)
    n = values.size
    if n < 4:
        raise ValueError(f"split test needs length >= 4, got {n}")
    half = n // 2
    a, b = values[:half], values[half:]
    m1, m2 = float(a.mean()), float(b.mean())
    v1 = float(np.mean((a - m1) ** 2))
    v2 = float(np.mean((b - m2) ** 2))

    constant_half = v1 == 0.0 or v2 == 0.0
    if v1 == 0.0 and v2 == 0.0:
        ratio = 1.0
    elif constant_half:
        ratio = math.inf
    else:
        ratio = max(v1, v2) / min(v1, v2)

    pooled = math.sqrt((a.size * v1 + b.size * v2) / n)
    if pooled == 0.0:
        gap = 0.0 if m1 == m2 else math.inf
    else:
        gap = abs(m1 - m2) / pooled
    return SplitSummary(mean_gap=gap, variance_ratio=ratio,
                        constant_half=constant_half)


def decompose_additive(x, period: int) -> DecompositionResult:
    """Classical additive decomposition with a centered moving-average trend.

    Even periods use the standard 2xMA (half weights on the window
    endpoints). Seasonal indexes are per-phase means of the detrended
    values, re-centered to sum to zero over one period.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    values = _values(x)
    n = values.size
    if n < 2 * period:
        raise ValueError(
            f"series of length {n} too short for period {period} "
            f"(needs >= {2 * period})"
        )

    if period % 2 == 0:
        weights = np.full(period + 1, 1.0 / period)
        weights[0] = weights[-1] = 0.5 / period
    else:
        weights = np.full(period, 1.0 / period)
    core = np.convolve(values, weights, mode="valid")
    edge = period // 2
    trend = np.full(n, np.nan)
    trend[edge : edge + core.size] = core

    detrended = values - trend
    phases = np.arange(n) % period
    indexes = np.empty(period)
    for k in range(period):
        vals = detrended[phases == k]
        vals = vals[np.isfinite(vals)]
        indexes[k] = vals.mean()
    indexes -= indexes.mean()
    seasonal = indexes[phases]
    residual = values - trend - seasonal
    return DecompositionResult(trend=trend, seasonal=seasonal,
                               residual=residual, period=period)


def deseasonalize(x, period: int):
    """Subtract the additive seasonal component; output length == input."""
    values = _values(x)
    result = decompose_additive(values, period)
    return _like(x, values - result.seasonal)


def exp_smooth(x, alpha: float):
    """Simple exponential smoothing: s1 = x1, s_t = a*x_t + (1-a)*s_{t-1}."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    values = _values(x)
    if values.size == 0:
        raise ValueError("cannot smooth an empty series")
    out = np.empty_like(values)
    out[0] = values[0]
    for t in range(1, values.size):
        out[t] = alpha * values[t] + (1.0 - alpha) * out[t - 1]
    return _like(x, out)


def standardize(x):
    """Rescale to mean 0 and population standard deviation 1."""
    values = _values(x)
    if values.size == 0:
        raise ValueError("cannot standardize an empty series")
    sd = float(values.std())
    if sd == 0.0:
        raise ValueError("constant series cannot be standardized")
    return _like(x, (values - values.mean()) / sd)


def stationarity_report(x, lag_order: int = 1) -> StationarityReport:
    """Joint verdict of the ADF test and the split-half diagnostics.

    "stationary" requires the ADF rejection and split diagnostics within
    bounds; "nonstationary" requires both tests to point the other way;
    anything mixed (including an ADF that cannot run) is "inconclusive".
    """
    try:
        adf = adf_test(x, lag_order)
        adf_stat, adf_reject = adf.statistic, adf.reject_5pct
        adf_failed = False
    except ValueError:
        adf_stat, adf_reject, adf_failed = math.nan, False, True
    split = split_summary_test(x)
    within = (split.mean_gap <= MEAN_GAP_MAX
              and split.variance_ratio <= VARIANCE_RATIO_MAX)
    if adf_failed:
        verdict = "inconclusive"
    elif adf_reject and within:
        verdict = "stationary"
    elif not adf_reject and not within:
        verdict = "nonstationary"
    else:
        verdict = "inconclusive"
    return StationarityReport(
        adf_statistic=adf_stat,
        adf_reject_5pct=adf_reject,
        split_mean_gap=split.mean_gap,
        split_variance_ratio=split.variance_ratio,
        verdict=verdict,
    )


def apply_pipeline(x, period: int | None = None, alpha: float | None = None,
                   zscore: bool = False):
    """Apply any of deseasonalize / smooth / standardize in the fixed order."""
    out = x
    if period is not None:
        out = deseasonalize(out, period)
    if alpha is not None:
        out = exp_smooth(out, alpha)
    if zscore:
        out = standardize(out)
    return out
