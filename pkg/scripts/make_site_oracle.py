#!/usr/bin/env python3
"""Generate the Z^2 site-percolation oracle fixture.

One high-trial crossing sweep at L=128 with R=0.5 (vertex adjacency); the
p_hat = 0.5 crossing is interpolated in retention probability and stored as
the reference value the L=64 bisection is compared against.

Usage: python scripts/make_site_oracle.py [out.json]
"""

import json
import sys
import time

import numpy as np

import percolab as pl
from percolab.phase import percolation_probability

SEED = 1984
L = 128.0
R = 0.5
TRIALS = 2000
P_GRID = [0.50, 0.52, 0.54, 0.55, 0.56, 0.57, 0.58, 0.60, 0.62]


def main(out_path="tests/fixtures/z2_site_oracle.json"):
    t0 = time.time()
    space = pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(L, 1.0))
    lam_grid = [-np.log(1.0 - p) for p in P_GRID]
    rows = []
    for lam, p in zip(lam_grid, P_GRID):
        row = percolation_probability(space, lam, R, TRIALS, SEED)
        rows.append(row)
        print(f"p={p:.3f} lambda={lam:.5f} p_hat={row.p_hat:.4f}")
    p_hat = np.array([r.p_hat for r in rows])
    # linear interpolation of the p_hat = 0.5 crossing in retention p
    i = int(np.searchsorted(p_hat, 0.5))
    x0, x1 = P_GRID[i - 1], P_GRID[i]
    y0, y1 = p_hat[i - 1], p_hat[i]
    p_c = x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0)
    doc = {
        "L": L,
        "R": R,
        "trials": TRIALS,
        "seed": SEED,
        "p_grid": P_GRID,
        "lambda_grid": [float(x) for x in lam_grid],
        "p_hat": p_hat.tolist(),
        "p_c_oracle": float(p_c),
        "lambda_c_oracle": float(-np.log(1.0 - p_c)),
    }
    with open(out_path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
    print(f"p_c_oracle = {p_c:.4f}  ({time.time() - t0:.0f}s)"
          f" -> {out_path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
