"""Compare the compiled and pure-numpy nearest-neighbor kernels.

Runs the cross-map inner-loop workload (batched kNN over delay vectors) at
several library sizes, checks that both backends agree, and prints a
throughput table. Usage:

    python benchmarks/kernel_benchmark.py [--n 10000] [--e 4] [--repeats 3]
"""

import argparse
import time

import numpy as np

from ccmcausal._kernels import _pure

try:
    from ccmcausal._kernels import _compiled
except ImportError:
    _compiled = None


def workload(n: int, E: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    m = n - (E - 1)
    pts = np.empty((m, E))
    for j in range(E):
        pts[:, j] = x[E - 1 - j : E - 1 - j + m]
    times = np.arange(1, m + 1, dtype=np.int64)
    return np.ascontiguousarray(pts), times


def run_backend(impl, pts, times, lib_size: int, k: int, repeats: int):
    lib = np.ascontiguousarray(pts[:lib_size])
    lib_t = times[:lib_size]
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = impl.knn_search(lib, lib_t, lib, lib_t, k, 0)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=10_000)
    parser.add_argument("--e", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    pts, times = workload(args.n, args.e)
    k = args.e + 1
    lib_sizes = [s for s in (100, 500, 2000, 5000, len(pts)) if s <= len(pts)]

    print(f"batched LOO kNN on delay vectors: n={args.n}, E={args.e}, "
          f"k={k}, best of {args.repeats}")
    header = f"{'lib size':>9} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for lib_size in lib_sizes:
        t_pure, out_pure = run_backend(_pure, pts, times, lib_size, k,
                                       args.repeats)
        if _compiled is None:
            print(f"{lib_size:>9} {t_pure:>10.4f} {'unavailable':>13} {'-':>8}")
            continue
        t_comp, out_comp = run_backend(_compiled, pts, times, lib_size, k,
                                       args.repeats)
        idx_match = np.array_equal(out_pure[0], out_comp[0])
        dist_match = np.allclose(out_pure[1], out_comp[1], atol=1e-12,
                                 equal_nan=True)
        agree = "" if (idx_match and dist_match) else "  DISAGREE"
        print(f"{lib_size:>9} {t_pure:>10.4f} {t_comp:>13.4f} "
              f"{t_pure / t_comp:>7.1f}x{agree}")
    if _compiled is None:
        print("compiled kernel not built; install with a C compiler to "
              "compare")


if __name__ == "__main__":
    main()
