"""Shared fixtures: canonical dynamical-system generators and helpers."""

import numpy as np
import pytest

from ccmcausal.dataset import TimeSeries


def make_logistic(n: int, r: float = 3.8, x0: float = 0.4,
                  transient: int = 100) -> np.ndarray:
    """Chaotic logistic map x_{t+1} = r x_t (1 - x_t), transient discarded."""
    x = x0
    out = np.empty(n + transient)
    for t in range(n + transient):
        x = r * x * (1.0 - x)
        out[t] = x
    return out[transient:]


def make_coupled_logistic(n: int, coupling: float = 0.32, seed: int = 0,
                          transient: int = 300) -> tuple[np.ndarray, np.ndarray]:
    """Unidirectionally coupled logistic pair: X autonomous, X drives Y.

    X_{t+1} = X_t (3.8 - 3.8 X_t)
    Y_{t+1} = Y_t (3.8 - 3.8 Y_t - coupling * X_t)
    """
    rng = np.random.default_rng(seed)
    x = float(rng.uniform(0.2, 0.8))
    y = float(rng.uniform(0.2, 0.8))
    xs = np.empty(n + transient)
    ys = np.empty(n + transient)
    for t in range(n + transient):
        x, y = x * (3.8 - 3.8 * x), y * (3.8 - 3.8 * y - coupling * x)
        xs[t], ys[t] = x, y
    return xs[transient:], ys[transient:]


def make_periodic(n_cycles: int = 20, period: int = 10) -> np.ndarray:
    """Exactly periodic series (bitwise-repeating pattern)."""
    pattern = np.sin(2.0 * np.pi * np.arange(period) / period)
    return np.tile(pattern, n_cycles)


def as_series(name: str, values) -> TimeSeries:
    values = np.asarray(values, dtype=float)
    return TimeSeries(name=name, values=values,
                      time_index=range(1, values.size + 1))


@pytest.fixture(scope="session")
def logistic_1000():
    return make_logistic(1000)


@pytest.fixture(scope="session")
def periodic_200():
    return make_periodic(20, 10)
