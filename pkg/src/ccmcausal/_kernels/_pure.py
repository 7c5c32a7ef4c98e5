"""Pure-numpy nearest-neighbor kernel (fallback backend).

Semantics are identical to the compiled kernel: for every query vector,
return the k nearest library rows by Euclidean distance, skipping any
library row whose time index lies within `theiler` steps of the query time,
with ties broken toward the smaller time index. Library times must be
strictly increasing so that row order equals time order.

Exactness over speed: a full stable argsort per query row reproduces the
(distance, time) ordering bit-for-bit, including duplicate points. The
compiled backend is the fast path.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"

# Query rows per chunk; bounds the (chunk, n_lib) distance matrix to ~tens of MB.
_CHUNK = 256


def knn_search(lib_points: np.ndarray, lib_times: np.ndarray,
               query_points: np.ndarray, query_times: np.ndarray,
               k: int, theiler: int) -> tuple[np.ndarray, np.ndarray]:
    """k nearest library rows per query under temporal exclusion.

    Returns (indices, distances), both shaped (n_queries, k). Indices are
    positions in the library arrays; queries with fewer than k eligible
    rows are padded with index -1 and distance +inf.
    """
    lib = np.ascontiguousarray(lib_points, dtype=np.float64)
    qpts = np.ascontiguousarray(query_points, dtype=np.float64)
    lt = np.asarray(lib_times, dtype=np.int64)
    qt = np.asarray(query_times, dtype=np.int64)
    n_lib = lib.shape[0]
    n_q = qpts.shape[0]

    out_idx = np.full((n_q, k), -1, dtype=np.int64)
    out_dist = np.full((n_q, k), np.inf, dtype=np.float64)

    take = min(k, n_lib)
    for start in range(0, n_q, _CHUNK):
        stop = min(start + _CHUNK, n_q)
        chunk = qpts[start:stop]
        diff = chunk[:, None, :] - lib[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        excluded = np.abs(lt[None, :] - qt[start:stop, None]) <= theiler
        d2[excluded] = np.inf
        # Stable sort: equal distances keep ascending row order = ascending time.
        order = np.argsort(d2, axis=1, kind="stable")[:, :take]
        rows = np.arange(stop - start)[:, None]
        sel_d2 = d2[rows, order]
        eligible = np.isfinite(sel_d2)
        out_idx[start:stop, :take] = np.where(eligible, order, -1)
        out_dist[start:stop, :take] = np.where(eligible, np.sqrt(sel_d2), np.inf)
    return out_idx, out_dist
