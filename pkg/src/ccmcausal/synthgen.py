"""Synthetic 8-variable nonlinear benchmark system with seeded noise and a
fixed ground-truth causal graph for scoring detections.

Each variable S1..S8 is a sum of Gaussian-kernel terms exp(-s^2/2) of lagged
(and in places same-step) values of other variables, plus i.i.d. Gaussian
noise. Same-step references make the printed system implicit; resolution is
controlled by `contemporaneous`:

* "ordered" (default): within a time step, variables are computed in index
  order; a same-step reference to an already-computed variable uses its
  current value, anything else (including self-references) falls back to
  the previous step.
* "previous": every same-step reference uses the previous step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import MultivariateDataset, TimeSeries
from .numerics import RandomStream

__all__ = ["SynthConfig", "TruthEdge", "GroundTruthGraph", "generate",
           "ground_truth", "VARIABLE_NAMES"]

VARIABLE_NAMES = tuple(f"S{i}" for i in range(1, 9))

_SQRT2 = math.sqrt(2.0)

# Per variable: (coefficient, source variable 1-based, lag); lag 0 is a
# same-step reference subject to the contemporaneous rule.
_TERMS: dict[int, tuple[tuple[float, int, int], ...]] = {
    1: ((0.125 * _SQRT2, 1, 1), (0.3 * _SQRT2, 1, 0), (0.2, 5, 3), (0.2, 6, 0)),
    2: ((1.2, 1, 1), (0.2, 1, 2), (0.2, 5, 2), (0.2, 3, 1)),
    3: ((-1.05, 1, 1), (0.2, 3, 0), (0.2, 2, 2), (0.2, 6, 2)),
    4: ((-1.15, 1, 1), (0.2 * _SQRT2, 4, 1), (1.35, 3, 1)),
    5: ((-1.15, 1, 3), (0.2 * _SQRT2, 2, 2), (1.35, 3, 1)),
    6: ((-1.05, 1, 1), (0.2, 3, 0), (0.2, 2, 2), (0.2, 7, 0)),
    7: ((-1.05, 4, 2), (0.2, 7, 0), (0.2, 5, 3), (0.2, 6, 0)),
    8: ((-1.05, 7, 2), (0.2, 8, 0), (0.2, 6, 1), (0.2, 2, 3)),
}

MAX_LAG = 3


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    burn_in counts every discarded leading row, including the 3 initial
    history rows the recursion needs, so burn_in >= 3; with burn_in == 3
    the first kept row is the first generated step.
    """

    n_observations: int = 100_000
    noise_sd: float = 0.1
    burn_in: int = 100
    rng_seed: int = 0
    contemporaneous: str = "ordered"

    def __post_init__(self):
        if self.n_observations < 10:
            raise ValueError("n_observations must be >= 10")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if self.burn_in < MAX_LAG:
            raise ValueError(f"burn_in must be >= {MAX_LAG}")
        if self.contemporaneous not in ("ordered", "previous"):
            raise ValueError(
                "contemporaneous must be 'ordered' or 'previous', got "
                f"{self.contemporaneous!r}"
            )


@dataclass(frozen=True)
class TruthEdge:
    source: str
    target: str
    lags: tuple[int, ...]


@dataclass(frozen=True)
class GroundTruthGraph:
    """Adjacency (with lags) implied by the generator equations."""

    nodes: tuple[str, ...]
    edges: tuple[TruthEdge, ...]
    feedback_pairs: tuple[tuple[str, str], ...]

    def directed_pairs(self, include_self: bool = False) -> set[tuple[str, str]]:
        return {(e.source, e.target) for e in self.edges
                if include_self or e.source != e.target}

    def to_json_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [
                {"source": e.source, "target": e.target, "lags": list(e.lags)}
                for e in self.edges
            ],
            "feedback_pairs": [list(p) for p in self.feedback_pairs],
        }


def _kernel(s: float) -> float:
    return math.exp(-0.5 * s * s)


def generate(config: SynthConfig,
             initial_history: np.ndarray | None = None) -> MultivariateDataset:
    """Generate the 8-variable system.

    initial_history, if given, must be a (3, 8) array of starting values
    (rows are the 3 oldest steps); otherwise the history is drawn N(0, 1)
    from substream 0 of the seed. Noise for variable k comes from
    substream k, so the draw layout is independent of evaluation order.
    """
    total = config.burn_in + config.n_observations
    values = np.zeros((total, 8), dtype=np.float64)

    stream = RandomStream(config.rng_seed, 0)
    if initial_history is None:
        values[:MAX_LAG] = stream.derive(0).normal(size=(MAX_LAG, 8))
    else:
        hist = np.asarray(initial_history, dtype=np.float64)
        if hist.shape != (MAX_LAG, 8):
            raise ValueError(f"initial_history must be shape (3, 8), got {hist.shape}")
        values[:MAX_LAG] = hist

    n_steps = total - MAX_LAG
    eps = np.empty((n_steps, 8), dtype=np.float64)
    for k in range(1, 9):
        if config.noise_sd == 0.0:
            eps[:, k - 1] = 0.0
        else:
            eps[:, k - 1] = stream.derive(k).normal(0.0, config.noise_sd,
                                                    size=n_steps)

    ordered = config.contemporaneous == "ordered"
    for t in range(MAX_LAG, total):
        row = values[t]
        prev = values[t - 1]
        for k in range(1, 9):
            acc = eps[t - MAX_LAG, k - 1]
            for coef, j, lag in _TERMS[k]:
                if lag > 0:
                    s = values[t - lag, j - 1]
                elif ordered and j < k:
                    s = row[j - 1]
                else:
                    s = prev[j - 1]
                acc += coef * _kernel(s)
            row[k - 1] = acc

    kept = values[config.burn_in :]
    time_index = list(range(1, config.n_observations + 1))
    series = tuple(
        TimeSeries(name=VARIABLE_NAMES[i], values=kept[:, i].copy(),
                   time_index=time_index)
        for i in range(8)
    )
    provenance = (
        f"synthetic 8-variable kernel system: n={config.n_observations}, "
        f"noise_sd={config.noise_sd}, burn_in={config.burn_in}, "
        f"seed={config.rng_seed}, contemporaneous={config.contemporaneous}"
    )
    return MultivariateDataset(series=series, provenance=provenance)


def ground_truth() -> GroundTruthGraph:
    """The fixed benchmark adjacency, including self-lags and lag-0 edges."""
    adjacency = {
        "S1": {"S1": (1, 2), "S5": (3,), "S6": (0,)},
        "S2": {"S1": (1, 2), "S5": (2,), "S3": (1,)},
        "S3": {"S1": (1,), "S3": (0,), "S2": (2,), "S6": (2,)},
        "S4": {"S1": (1,), "S4": (1,), "S3": (1,)},
        "S5": {"S1": (3,), "S2": (2,), "S3": (1,)},
        "S6": {"S1": (1,), "S3": (0,), "S2": (2,), "S7": (0,)},
        "S7": {"S4": (2,), "S7": (0,), "S5": (3,), "S6": (0,)},
        "S8": {"S7": (2,), "S8": (0,), "S6": (1,), "S2": (3,)},
    }
    edges = tuple(
        TruthEdge(source=src, target=dst, lags=lags)
        for dst in VARIABLE_NAMES
        for src, lags in sorted(adjacency[dst].items())
    )
    feedback = (("S1", "S5"), ("S1", "S6"), ("S2", "S3"), ("S2", "S5"),
                ("S3", "S6"), ("S6", "S7"))
    return GroundTruthGraph(nodes=VARIABLE_NAMES, edges=edges,
                            feedback_pairs=feedback)
