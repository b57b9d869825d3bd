#!/usr/bin/env python3
"""Timing comparison of the numba kernels against the numpy fallbacks.

Both backends are imported side by side (no env juggling needed); the
PERCOLAB_BACKEND flag is for selecting the library-wide backend at import
time, see percolab.kernels.

Usage: python benchmarks/bench_kernels.py [--n 20000]
"""

import argparse
import time

import numpy as np

from percolab.kernels import numba_backend as nb
from percolab.kernels import numpy_backend as npb
from percolab.rng import stream


def bench(label, fn_nb, fn_np, repeat=3):
    fn_nb()  # JIT warmup
    t_nb = min(_time(fn_nb) for _ in range(repeat))
    t_np = min(_time(fn_np) for _ in range(repeat))
    speedup = t_np / t_nb if t_nb > 0 else float("inf")
    print(f"{label:34s} numba {t_nb * 1e3:9.2f} ms   "
          f"numpy {t_np * 1e3:9.2f} ms   x{speedup:,.1f}")


def _time(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    args = ap.parse_args()
    n = args.n
    rng = stream(1)

    xy = rng.random((n, 2)) * 60.0 - 30.0
    bench(f"euclid edges (n={n})",
          lambda: nb.edges_within_euclid(xy, 1.0),
          lambda: npb.edges_within_euclid(xy, 1.0))

    m = n // 4
    rt = np.column_stack([np.arccosh(1 + rng.random(m) * (np.cosh(9) - 1)),
                          rng.random(m) * 2 * np.pi])
    bench(f"hyperbolic edges (n={m})",
          lambda: nb.edges_within_hyperbolic(rt, 2.0),
          lambda: npb.edges_within_hyperbolic(rt, 2.0))

    eu, ev = nb.edges_within_euclid(xy, 1.0)
    bench(f"union-find labels (e={len(eu)})",
          lambda: nb.union_labels(n, eu, ev),
          lambda: npb.union_labels(n, eu, ev))

    centers = rng.random((400, 2)) * 60.0 - 30.0
    bench(f"first-match assign (n={n})",
          lambda: nb.assign_first_match_euclid(xy, centers, 2.0),
          lambda: npb.assign_first_match_euclid(xy, centers, 2.0))

    cand = rt[:m // 2]
    front = rt[m // 2:m // 2 + 500]
    bench(f"bfs scan (cand={len(cand)})",
          lambda: nb.bfs_scan_hyperbolic(cand, front, 2.0, 99.0),
          lambda: npb.bfs_scan_hyperbolic(cand, front, 2.0, 99.0))


if __name__ == "__main__":
    main()
