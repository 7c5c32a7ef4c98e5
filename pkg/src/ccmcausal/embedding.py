"""State-space reconstruction: delay embeddings, nearest neighbors on the
shadow manifold, simplex-projection forecasting, and embedding-dimension
selection by forecast skill.

Conventions: time indices are 1-based (t = 1..L in source indexing), so a
manifold built with dimension E and lag tau covers times 1+(E-1)*tau .. L.
A point at time t is the vector <X(t), X(t-tau), ..., X(t-(E-1)tau)>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._kernels import knn_search
from .numerics import pearson_flagged

__all__ = [
    "EmbeddingConfig",
    "ShadowManifold",
    "NeighborSet",
    "ForecastResult",
    "SelectionResult",
    "embed",
    "neighbors",
    "simplex_weights",
    "simplex_forecast",
    "select_embedding",
]


@dataclass(frozen=True)
class EmbeddingConfig:
    """Parameters of a delay embedding and its simplex forecaster.

    nn defaults to E + 1 (the minimum simplex around a point in E
    dimensions); theiler_window is the temporal exclusion radius around a
    query during neighbor search (0 excludes only the query itself).
    """

    E: int
    tau: int = 1
    tp: int = 1
    theiler_window: int = 0
    nn: int | None = None

    def __post_init__(self):
        if self.E < 1:
            raise ValueError(f"embedding dimension must be >= 1, got {self.E}")
        if self.tau < 1:
            raise ValueError(f"lag step must be >= 1, got {self.tau}")
        if self.tp < 1:
            raise ValueError(f"prediction horizon must be >= 1, got {self.tp}")
        if self.theiler_window < 0:
            raise ValueError("theiler_window must be >= 0")
        if self.nn is None:
            object.__setattr__(self, "nn", self.E + 1)
        elif self.nn < 1:
            raise ValueError(f"neighbor count must be >= 1, got {self.nn}")


@dataclass(frozen=True)
class ShadowManifold:
    """Lagged-coordinate vectors of one series, with their time indices."""

    points: np.ndarray  # (m, E) float64, C-contiguous
    times: np.ndarray   # (m,) int64, 1-based source times, strictly increasing
    source_name: str
    config: EmbeddingConfig

    def __len__(self) -> int:
        return self.points.shape[0]


class NeighborSet(NamedTuple):
    """Nearest neighbors of a query: time indices (nearest first) and
    matching nondecreasing Euclidean distances."""

    indices: np.ndarray
    distances: np.ndarray


class ForecastResult(NamedTuple):
    """Simplex forecast skill: Pearson rho plus the per-point predictions."""

    rho: float
    predictions: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of an embedding-dimension scan."""

    best_E: int
    skill_curve: tuple[tuple[int, float], ...]
    degenerate: bool = False


def _series_values(x) -> np.ndarray:
    """Accept a TimeSeries or any 1-d sequence of reals."""
    values = getattr(x, "values", x)
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {arr.shape}")
    return arr


def embed(x, config: EmbeddingConfig, name: str | None = None) -> ShadowManifold:
    """Build the shadow manifold of a series.

    The manifold has L - (E-1)*tau points; point k sits at time
    times[k] = 1 + (E-1)*tau + k and holds the lagged coordinates
    <X(t), X(t-tau), ..., X(t-(E-1)tau)>.
    """
    values = _series_values(x)
    L = values.size
    E, tau = config.E, config.tau
    m = L - (E - 1) * tau
    if m < 2:
        raise ValueError(
            f"series of length {L} too short for E={E}, tau={tau} "
            f"(needs at least {(E - 1) * tau + 2})"
        )
    points = np.empty((m, E), dtype=np.float64)
    first = (E - 1) * tau  # 0-based offset of the first embeddable time
    for j in range(E):
        col = values[first - j * tau : first - j * tau + m]
        points[:, j] = col
    times = np.arange(first + 1, L + 1, dtype=np.int64)
    if name is None:
        name = getattr(x, "name", "")
    return ShadowManifold(points=points, times=times, source_name=name,
                          config=config)


def neighbors(manifold: ShadowManifold, query_time: int, k: int) -> NeighborSet:
    """The k nearest manifold points to the point at query_time.

    The query itself and any point within theiler_window time steps of it
    are excluded; equidistant points are ordered by smaller time index.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pos = np.searchsorted(manifold.times, query_time)
    if pos >= len(manifold) or manifold.times[pos] != query_time:
        raise ValueError(f"query_time {query_time} not on the manifold")
    theiler = manifold.config.theiler_window
    eligible = int(np.sum(np.abs(manifold.times - query_time) > theiler))
    if eligible < k:
        raise ValueError(
            f"only {eligible} eligible points after exclusions, need {k}"
        )
    idx, dist = knn_search(
        manifold.points, manifold.times,
        manifold.points[pos : pos + 1], manifold.times[pos : pos + 1],
        k, theiler,
    )
    return NeighborSet(indices=manifold.times[idx[0]], distances=dist[0])


def simplex_weights(distances) -> np.ndarray:
    """Exponential simplex weights from nondecreasing neighbor distances.

    w_i = u_i / sum(u) with u_i = exp(-d_i / d_1). When the nearest distance
    is zero, weight is spread uniformly over all zero-distance entries and
    the rest get 0.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("distances must be a nonempty 1-d sequence")
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if np.any(np.diff(d) < 0):
        raise ValueError("distances must be nondecreasing")
    return _batch_weights(d[None, :])[0]


def _batch_weights(dist: np.ndarray) -> np.ndarray:
    """Simplex weights for a (q, k) batch of sorted neighbor distances."""
    d1 = dist[:, :1]
    zero_first = d1[:, 0] == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.exp(-dist / d1)
    if np.any(zero_first):
        u[zero_first] = (dist[zero_first] == 0.0).astype(np.float64)
    return u / u.sum(axis=1, keepdims=True)


def _batch_estimate(idx: np.ndarray, dist: np.ndarray,
                    response: np.ndarray) -> np.ndarray:
    """Simplex-weighted averages of response values at neighbor rows."""
    w = _batch_weights(dist)
    return np.sum(w * response[idx], axis=1)


def _forecastable(manifold: ShadowManifold, series_length: int) -> np.ndarray:
    """Positions whose future time t + tp still lies inside the series."""
    tp = manifold.config.tp
    return np.nonzero(manifold.times + tp <= series_length)[0]


def simplex_forecast(x, config: EmbeddingConfig,
                     mode: str = "loo") -> ForecastResult:
    """Simplex-projection forecast skill of a series against itself.

    Each point's value tp steps ahead is predicted as the simplex-weighted
    average of its neighbors' futures. mode="loo" predicts every point with
    its own (Theiler-excluded) neighbor pool; mode="split" uses the first
    half of the manifold as library and predicts the second half.
    Returns rho = pearson(observed, predicted) plus the predictions.
    """
    if mode not in ("loo", "split"):
        raise ValueError(f"mode must be 'loo' or 'split', got {mode!r}")
    values = _series_values(x)
    manifold = embed(values, config, name=getattr(x, "name", ""))
    usable = _forecastable(manifold, values.size)
    if usable.size < config.nn + 1:
        raise ValueError(
            f"too few predictable points ({usable.size}) for nn={config.nn}"
        )
    if mode == "loo":
        lib_pos = usable
        query_pos = usable
    else:
        half = usable.size // 2
        lib_pos, query_pos = usable[:half], usable[half:]
        if lib_pos.size < config.nn or query_pos.size < 2:
            raise ValueError("series too short for a train/test split")

    lib_pts = np.ascontiguousarray(manifold.points[lib_pos])
    lib_t = manifold.times[lib_pos]
    q_pts = np.ascontiguousarray(manifold.points[query_pos])
    q_t = manifold.times[query_pos]
    idx, dist = knn_search(lib_pts, lib_t, q_pts, q_t,
                           config.nn, config.theiler_window)
    if np.any(idx < 0):
        raise ValueError(
            "too few eligible neighbors after exclusions; reduce nn or "
            "theiler_window"
        )
    futures = values[lib_t - 1 + config.tp]  # 1-based times -> 0-based rows
    predictions = _batch_estimate(idx, dist, futures)
    observed = values[q_t - 1 + config.tp]
    rho, degenerate = pearson_flagged(observed, predictions)
    return ForecastResult(rho=rho, predictions=predictions,
                          degenerate=degenerate)


def select_embedding(x, e_range: Sequence[int] | range, tau: int = 1,
                     tp: int = 1, theiler_window: int = 0) -> SelectionResult:
    """Scan embedding dimensions and pick the one with the best leave-one-out
    forecast skill; ties within 1e-6 resolve to the smaller E."""
    values = _series_values(x)
    curve: list[tuple[int, float]] = []
    any_degenerate = False
    for E in e_range:
        config = EmbeddingConfig(E=E, tau=tau, tp=tp,
                                 theiler_window=theiler_window)
        try:
            result = simplex_forecast(values, config, mode="loo")
        except ValueError:
            continue  # series too short for this E
        any_degenerate |= result.degenerate
        curve.append((E, result.rho))
    if not curve:
        raise ValueError("no feasible embedding dimension in the given range")
    best_E, best_rho = curve[0]
    for E, rho in curve[1:]:
        if rho > best_rho + 1e-6:
            best_E, best_rho = E, rho
    return SelectionResult(best_E=best_E, skill_curve=tuple(curve),
                           degenerate=any_degenerate)
