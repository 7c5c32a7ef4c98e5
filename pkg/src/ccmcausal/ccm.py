"""Convergent cross mapping: cross-map estimation from shadow manifolds,
skill curves over growing library sizes, a paired-bootstrap convergence
test, and directed/feedback causality classification.

Direction naming: a result (source -> target) asserts "source causally
influences target" and is computed by cross-mapping source from target's
manifold: if source influences target, information about source is stored
in target and can be recovered from its reconstruction.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import knn_search
from .embedding import EmbeddingConfig, ShadowManifold, _batch_estimate, embed
from .numerics import RandomStream, kendall_tau, pearson_flagged, stable_name_id

__all__ = [
    "CcmConfig",
    "CrossMapResult",
    "LibSizeStats",
    "CcmResult",
    "GraphEdge",
    "CausalGraph",
    "ConvergenceDiagnostic",
    "cross_map",
    "ccm_curve",
    "ccm_pairwise",
    "convergence_diagnostic",
    "default_lib_sizes",
    "build_graph",
]


@dataclass(frozen=True)
class CcmConfig:
    """Cross-mapping run parameters.

    lib_sizes=None resolves, per pair, to 10 geometrically spaced sizes
    from max(E+2, 10) up to the full usable manifold size. Replicates are
    random library subsets drawn without replacement from per-replicate
    substreams, so any execution order reproduces the same result.
    """

    embedding: EmbeddingConfig
    lib_sizes: tuple[int, ...] | None = None
    replicates: int = 100
    significance_level: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        if self.replicates < 2:
            raise ValueError("replicates must be >= 2")
        if not 0.0 < self.significance_level < 1.0:
            raise ValueError("significance_level must lie in (0, 1)")
        if self.lib_sizes is not None:
            sizes = tuple(int(s) for s in self.lib_sizes)
            if len(sizes) < 2:
                raise ValueError("need at least 2 library sizes")
            if any(b <= a for a, b in zip(sizes, sizes[1:])):
                raise ValueError("lib_sizes must be strictly increasing")
            if sizes[0] < self.embedding.E + 2:
                raise ValueError(
                    f"min library size {sizes[0]} below E+2 = "
                    f"{self.embedding.E + 2}"
                )
            object.__setattr__(self, "lib_sizes", sizes)


class CrossMapResult(NamedTuple):
    rho: float
    estimates: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class LibSizeStats:
    """Cross-map skill at one library size over bootstrap replicates."""

    lib_size: int
    rho_mean: float
    rho_sd: float
    rhos: tuple[float, ...]


@dataclass(frozen=True)
class CcmResult:
    """Cross-map skill curve with its paired-bootstrap convergence test."""

    source_name: str
    target_name: str
    curve: tuple[LibSizeStats, ...]
    p_value: float
    rho_max_lib: float
    significant: bool
    degenerate: bool = False


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    p_value: float
    rho: float | None
    significant: bool
    lag: int | None = None


@dataclass(frozen=True)
class CausalGraph:
    """Directed detections plus the pairs significant in both directions."""

    nodes: tuple[str, ...]
    edges: tuple[GraphEdge, ...]
    feedback_pairs: tuple[tuple[str, str], ...]
    results: tuple = ()
    notes: tuple[str, ...] = ()


class ConvergenceDiagnostic(NamedTuple):
    kendall_tau: float
    plateau_rho: float


def default_lib_sizes(usable: int, E: int, count: int = 10) -> tuple[int, ...]:
    """Geometrically spaced library sizes from max(E+2, 10) to `usable`."""
    lo = max(E + 2, 10)
    if lo > usable:
        raise ValueError(
            f"usable manifold size {usable} below minimum library size {lo}"
        )
    raw = np.geomspace(lo, usable, num=count)
    sizes = sorted(set(int(round(v)) for v in raw))
    if len(sizes) < 2:
        raise ValueError(
            f"cannot place 2 distinct library sizes in [{lo}, {usable}]"
        )
    return tuple(sizes)


def _response_values(series_values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Series values at 1-based manifold times."""
    return series_values[times - 1]


def _cross_map_library(manifold: ShadowManifold, source_values: np.ndarray,
                       lib_positions: np.ndarray) -> CrossMapResult:
    """Cross-map the source from the manifold restricted to a library.

    The library rows double as the evaluation set: each library point's
    source value is estimated leave-one-out from its nn nearest library
    neighbors (Theiler window applied), and rho is the Pearson correlation
    between observed and estimated values over those times. Evaluating each
    replicate on its own library keeps the downstream paired convergence
    test honest: a replicate's skill carries the evaluation noise of its
    library size, so small-library skill estimates spread widely and random
    plateau offsets do not masquerade as convergence.
    """
    config = manifold.config
    lib_pts = np.ascontiguousarray(manifold.points[lib_positions])
    lib_t = manifold.times[lib_positions]
    response = _response_values(source_values, lib_t)
    idx, dist = knn_search(lib_pts, lib_t, lib_pts, lib_t,
                           config.nn, config.theiler_window)
    if np.any(idx < 0):
        raise ValueError(
            f"library of {len(lib_t)} leaves fewer than nn={config.nn} "
            f"eligible neighbors after exclusions"
        )
    estimates = _batch_estimate(idx, dist, response)
    rho, degenerate = pearson_flagged(response, estimates)
    return CrossMapResult(rho=rho, estimates=estimates, degenerate=degenerate)


def cross_map(source, target, config: EmbeddingConfig,
              library=None) -> CrossMapResult:
    """Estimate `source` from `target`'s shadow manifold.

    `library` selects the manifold positions (0-based rows of the target
    manifold) to reconstruct from; None uses the full manifold. Estimates
    are produced at the library times; skill in them is evidence that
    source causally influences target.
    """
    source_values = np.asarray(getattr(source, "values", source), dtype=float)
    manifold = embed(target, config)
    if library is None:
        lib = np.arange(len(manifold))
    else:
        lib = np.asarray(library, dtype=np.int64)
        if lib.size and (lib.min() < 0 or lib.max() >= len(manifold)):
            raise ValueError("library indices outside the target manifold")
    if lib.size < config.E + 2:
        raise ValueError(
            f"library of {lib.size} points is below E+2 = {config.E + 2}"
        )
    if source_values.size < manifold.times[-1]:
        raise ValueError("source series shorter than the target manifold span")
    return _cross_map_library(manifold, source_values, lib)


def _resolve_jobs(n_jobs: int | None) -> int:
    if n_jobs is None:
        return max(1, os.cpu_count() or 1)
    return max(1, n_jobs)


def ccm_curve(source, target, config: CcmConfig,
              n_jobs: int | None = None) -> CcmResult:
    """Cross-map skill over increasing library sizes with a convergence test.

    For each library size, `replicates` random index subsets are drawn
    (without replacement, one substream per replicate). The convergence
    p-value is the fraction of paired replicates whose skill at the smallest
    library is >= the skill at the largest; significance additionally
    requires positive skill at the largest library.
    """
    source_name = getattr(source, "name", "source")
    target_name = getattr(target, "name", "target")
    source_values = np.asarray(getattr(source, "values", source), dtype=float)
    manifold = embed(target, config.embedding, name=target_name)
    usable = len(manifold)
    if source_values.size < manifold.times[-1]:
        raise ValueError("source series shorter than the target manifold span")

    sizes = config.lib_sizes
    if sizes is None:
        sizes = default_lib_sizes(usable, config.embedding.E)
    if sizes[-1] > usable:
        raise ValueError(
            f"max library size {sizes[-1]} exceeds usable manifold size {usable}"
        )

    degenerate_input = bool(
        np.ptp(source_values) == 0.0
        or np.ptp(np.asarray(getattr(target, "values", target),
                             dtype=float)) == 0.0
    )

    base = RandomStream(config.rng_seed, 0).derive(
        stable_name_id(str(source_name)), stable_name_id(str(target_name))
    )
    rhos = np.zeros((len(sizes), config.replicates))

    tasks = []
    for i_size, size in enumerate(sizes):
        if size == usable:
            # Every without-replacement draw of `usable` from `usable` is the
            # full library; compute once and reuse across replicates.
            tasks.append((i_size, 0, np.arange(usable, dtype=np.int64)))
        else:
            for j_rep in range(config.replicates):
                subset = base.derive(i_size, j_rep).subset(usable, size)
                tasks.append((i_size, j_rep, subset))

    def run(task):
        i_size, j_rep, subset = task
        return i_size, j_rep, _cross_map_library(manifold, source_values,
                                                 subset).rho

    workers = _resolve_jobs(n_jobs)
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]

    for i_size, j_rep, rho in outcomes:
        if sizes[i_size] == usable:
            rhos[i_size, :] = rho
        else:
            rhos[i_size, j_rep] = rho

    curve = tuple(
        LibSizeStats(
            lib_size=int(sizes[i]),
            rho_mean=float(rhos[i].mean()),
            rho_sd=float(rhos[i].std()),
            rhos=tuple(float(v) for v in rhos[i]),
        )
        for i in range(len(sizes))
    )
    p_value = float(np.mean(rhos[0] >= rhos[-1]))
    rho_max_lib = curve[-1].rho_mean
    significant = (p_value < config.significance_level) and (rho_max_lib > 0.0)
    return CcmResult(
        source_name=str(source_name),
        target_name=str(target_name),
        curve=curve,
        p_value=p_value,
        rho_max_lib=rho_max_lib,
        significant=significant and not degenerate_input,
        degenerate=degenerate_input,
    )


def build_graph(results, nodes, notes=()) -> CausalGraph:
    """Assemble a CausalGraph from directed CcmResults."""
    edges = tuple(
        GraphEdge(
            source=r.source_name,
            target=r.target_name,
            p_value=r.p_value,
            rho=r.rho_max_lib,
            significant=r.significant,
        )
        for r in results
    )
    significant_dirs = {(e.source, e.target) for e in edges if e.significant}
    feedback = sorted({tuple(sorted((a, b))) for a, b in significant_dirs
                       if (b, a) in significant_dirs})
    return CausalGraph(
        nodes=tuple(nodes),
        edges=edges,
        feedback_pairs=tuple(feedback),
        results=tuple(results),
        notes=tuple(notes),
    )


def ccm_pairwise(dataset, config: CcmConfig, target: str | None = None,
                 n_jobs: int | None = None) -> CausalGraph:
    """Run ccm_curve over both directions of every requested pair.

    With `target` given, every other series is paired against the target
    (hub scan); otherwise all unordered pairs are tested. Feedback pairs are
    those significant in both directions. Constant series never abort the
    scan; their results carry the degenerate flag.
    """
    names = [s.name for s in dataset.series]
    if len(names) < 2:
        raise ValueError("pairwise CCM needs at least 2 series")
    if target is not None:
        if target not in names:
            raise ValueError(
                f"unknown target {target!r}; available: {', '.join(names)}"
            )
        pairs = [(other, target) for other in names if other != target]
    else:
        pairs = list(itertools.combinations(names, 2))

    results = []
    for a, b in pairs:
        sa, sb = dataset.column(a), dataset.column(b)
        results.append(ccm_curve(sa, sb, config, n_jobs=n_jobs))
        results.append(ccm_curve(sb, sa, config, n_jobs=n_jobs))
    return build_graph(results, names)


def convergence_diagnostic(result: CcmResult) -> ConvergenceDiagnostic:
    """Rank correlation of skill with library size, plus the plateau skill."""
    if len(result.curve) < 3:
        raise ValueError("diagnostic needs a curve with at least 3 lib sizes")
    sizes = [s.lib_size for s in result.curve]
    means = [s.rho_mean for s in result.curve]
    return ConvergenceDiagnostic(
        kendall_tau=kendall_tau(sizes, means),
        plateau_rho=means[-1],
    )
