"""Shared numeric kernels: descriptive statistics, Pearson correlation,
the regularized incomplete beta function, F-distribution tail probabilities,
rank correlation, and seedable splittable random streams.

All functions are pure; RandomStream instances are cheap to derive and are
never shared across threads (each parallel task derives its own substream).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RandomStream",
    "SummaryStats",
    "pearson",
    "pearson_flagged",
    "reg_inc_beta",
    "f_sf",
    "summary",
    "kendall_tau",
    "stable_name_id",
]

_U64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(x: int) -> int:
    """One round of the splitmix64 permutation (used to mix substream ids)."""
    x = (x + 0x9E3779B97F4A7C15) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return x ^ (x >> 31)


def stable_name_id(name: str) -> int:
    """Platform-stable 64-bit id for a string (python's hash() is salted)."""
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RandomStream:
    """Counter-based random stream with deterministic substream derivation.

    Identical (seed, stream_id) pairs always produce the identical value
    sequence; distinct stream_ids give statistically independent sequences.
    Backed by the Philox bit generator keyed on the 128-bit (seed, stream_id)
    pair, so substreams can be created in any order without coordination.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= seed <= _U64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not 0 <= stream_id <= _U64:
            raise ValueError("stream_id must fit in 64 unsigned bits")
        self.seed = seed
        self.stream_id = stream_id
        key = np.array([seed, stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def derive(self, *indices: int) -> "RandomStream":
        """Substream selected by a tuple of integers (e.g. pair, size, rep)."""
        sid = self.stream_id
        for ix in indices:
            sid = _splitmix64(sid ^ _splitmix64(ix & _U64))
        return RandomStream(self.seed, sid)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def subset(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), returned sorted ascending."""
        if k > n:
            raise ValueError(f"cannot draw {k} distinct indices from {n}")
        idx = self._gen.choice(n, size=k, replace=False)
        idx.sort()
        return idx

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class SummaryStats:
    """Descriptive statistics with the population (1/n) variance convention."""

    n: int
    mean: float
    variance: float
    min: float
    max: float


def summary(x) -> SummaryStats:
    """Summary statistics of a nonempty sequence (population variance)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise ValueError("summary() requires a nonempty sequence")
    mean = float(arr.mean())
    return SummaryStats(
        n=int(arr.size),
        mean=mean,
        variance=float(np.mean((arr - mean) ** 2)),
        min=float(arr.min()),
        max=float(arr.max()),
    )


def pearson_flagged(x, y) -> tuple[float, bool]:
    """Pearson correlation plus a degeneracy flag.

    Returns (rho, degenerate). If either input has zero variance the
    correlation is undefined; the sentinel 0.0 is returned with the flag set
    so callers (e.g. bootstrap replicates on tiny libraries) can decide
    whether that is fatal.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError(
            f"pearson() needs two equal-length 1-d sequences, got shapes "
            f"{xa.shape} and {ya.shape}"
        )
    if xa.size < 2:
        raise ValueError("pearson() requires length >= 2")
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    vx = float(np.dot(xd, xd))
    vy = float(np.dot(yd, yd))
    if vx == 0.0 or vy == 0.0:
        return 0.0, True
    rho = float(np.dot(xd, yd)) / math.sqrt(vx * vy)
    # Guard rounding excursions outside [-1, 1].
    return min(1.0, max(-1.0, rho)), False


def pearson(x, y) -> float:
    """Pearson correlation; degenerate (zero-variance) inputs give 0.0."""
    return pearson_flagged(x, y)[0]


def _beta_cont_frac(a: float, b: float, x: float, tol: float, max_iter: int) -> float:
    """Continued fraction for the incomplete beta (modified Lentz scheme)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge for "
        f"a={a}, b={b}, x={x}"
    )


def reg_inc_beta(x: float, a: float, b: float, *, tol: float = 1e-12,
                 max_iter: int = 300) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Continued-fraction evaluation with the symmetry switch at
    x = (a+1)/(a+b+2); monotone nondecreasing in x with I_0 = 0, I_1 = 1.
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _beta_cont_frac(a, b, x, tol, max_iter) / a
    else:
        value = 1.0 - front * _beta_cont_frac(b, a, 1.0 - x, tol, max_iter) / b
    return min(1.0, max(0.0, value))


def f_sf(f: float, d1: int, d2: int) -> float:
    """Upper-tail probability P(F > f) for the F(d1, d2) distribution."""
    if d1 <= 0 or d2 <= 0:
        raise ValueError(f"degrees of freedom must be positive, got ({d1}, {d2})")
    if f < 0:
        raise ValueError(f"F statistic must be nonnegative, got {f}")
    if f == 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    x = d2 / (d2 + d1 * f)
    return reg_inc_beta(x, d2 / 2.0, d1 / 2.0)


def kendall_tau(x, y) -> float:
    """Kendall tau-b rank correlation; all-ties input yields 0 by convention."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("kendall_tau() needs two equal-length 1-d sequences")
    n = xa.size
    if n < 2:
        raise ValueError("kendall_tau() requires length >= 2")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = xa[i] - xa[j]
            dy = ya[i] - ya[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx * dy > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0:
        return 0.0
    return (concordant - discordant) / denom
