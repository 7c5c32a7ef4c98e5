# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled nearest-neighbor kernel.

Same contract as ccmcausal._kernels._pure.knn_search: k nearest library rows
per query by Euclidean distance, skipping rows within `theiler` time steps
of the query time, ties broken toward the smaller time index. Library times
must be strictly increasing (row order == time order).

The scan visits library rows in ascending time order and keeps a sorted
k-best insertion buffer; a strict "<" comparison on squared distances
reproduces the stable (distance, time) ordering exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt


def knn_search(double[:, ::1] lib_points, long long[::1] lib_times,
               double[:, ::1] query_points, long long[::1] query_times,
               int k, int theiler):
    """See ccmcausal._kernels._pure.knn_search."""
    cdef Py_ssize_t n_lib = lib_points.shape[0]
    cdef Py_ssize_t dim = lib_points.shape[1]
    cdef Py_ssize_t n_q = query_points.shape[0]

    idx_arr = np.full((n_q, k), -1, dtype=np.int64)
    dist_arr = np.full((n_q, k), np.inf, dtype=np.float64)
    cdef long long[:, ::1] out_idx = idx_arr
    cdef double[:, ::1] out_dist = dist_arr

    cdef Py_ssize_t j, i, e, pos, filled
    cdef long long qt, dt
    cdef double d2, diff, worst

    with nogil:
        for j in range(n_q):
            qt = query_times[j]
            filled = 0
            worst = INFINITY
            for i in range(n_lib):
                dt = lib_times[i] - qt
                if -theiler <= dt <= theiler:
                    continue
                d2 = 0.0
                for e in range(dim):
                    diff = lib_points[i, e] - query_points[j, e]
                    d2 += diff * diff
                if filled < k:
                    pos = filled
                    while pos > 0 and out_dist[j, pos - 1] > d2:
                        out_dist[j, pos] = out_dist[j, pos - 1]
                        out_idx[j, pos] = out_idx[j, pos - 1]
                        pos -= 1
                    out_dist[j, pos] = d2
                    out_idx[j, pos] = i
                    filled += 1
                    worst = out_dist[j, k - 1] if filled == k else INFINITY
                elif d2 < worst:
                    pos = k - 1
                    while pos > 0 and out_dist[j, pos - 1] > d2:
                        out_dist[j, pos] = out_dist[j, pos - 1]
                        out_idx[j, pos] = out_idx[j, pos - 1]
                        pos -= 1
                    out_dist[j, pos] = d2
                    out_idx[j, pos] = i
                    worst = out_dist[j, k - 1]
            for pos in range(k):
                if out_idx[j, pos] >= 0:
                    out_dist[j, pos] = sqrt(out_dist[j, pos])
    return idx_arr, dist_arr
