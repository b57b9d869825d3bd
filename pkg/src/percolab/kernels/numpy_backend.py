"""Pure numpy/scipy fallbacks for the numba kernels.

Slower but dependency-light; selected with PERCOLAB_BACKEND=numpy. Output is
bit-identical to the numba backend (same edge sets, same canonical labels).
"""

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

NAME = "numpy"

_EMPTY_I8 = np.empty(0, np.int64)


def union_labels(n, eu, ev):
    """Connected-component labels, canonicalized to min point index."""
    if n == 0:
        return _EMPTY_I8.copy()
    if len(eu) == 0:
        return np.arange(n, dtype=np.int64)
    data = np.ones(len(eu), np.int8)
    g = sparse.coo_matrix((data, (eu, ev)), shape=(n, n))
    _, comp = connected_components(g, directed=False)
    first = np.full(comp.max() + 1, n, np.int64)
    np.minimum.at(first, comp, np.arange(n, dtype=np.int64))
    return first[comp]


def edges_within_euclid(xy, rmax):
    n = xy.shape[0]
    if n < 2:
        return _EMPTY_I8.copy(), _EMPTY_I8.copy()
    pairs = cKDTree(xy).query_pairs(r=float(rmax), output_type="ndarray")
    if pairs.size == 0:
        return _EMPTY_I8.copy(), _EMPTY_I8.copy()
    eu = pairs[:, 0].astype(np.int64)
    ev = pairs[:, 1].astype(np.int64)
    swap = eu > ev
    eu[swap], ev[swap] = ev[swap], eu[swap].copy()
    idx = np.lexsort((ev, eu))
    return eu[idx], ev[idx]


def _cosh_dist_arr(r1, t1, r2, t2):
    s = np.sin(0.5 * (t1 - t2))
    return np.cosh(r1 - r2) + 2.0 * np.sinh(r1) * np.sinh(r2) * s * s


def _cosh_dist_fast(c1, s1, t1, c2, s2, t2):
    # product form, matching the numba edge kernels
    return c1 * c2 - s1 * s2 * np.cos(t1 - t2)


def edges_within_hyperbolic(rt, dmax):
    n = rt.shape[0]
    if n < 2:
        return _EMPTY_I8.copy(), _EMPTY_I8.copy()
    coshD = np.cosh(dmax)
    r = rt[:, 0]
    t = rt[:, 1]
    ch = np.cosh(r)
    sh = np.sinh(r)
    us = []
    vs = []
    block = max(1, int(4e6) // max(n, 1))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        cd = _cosh_dist_fast(ch[lo:hi, None], sh[lo:hi, None],
                             t[lo:hi, None], ch[None, :], sh[None, :],
                             t[None, :])
        bu, bv = np.nonzero(cd <= coshD)
        keep = lo + bu < bv
        us.append((lo + bu[keep]).astype(np.int64))
        vs.append(bv[keep].astype(np.int64))
    if not us:
        return _EMPTY_I8.copy(), _EMPTY_I8.copy()
    eu = np.concatenate(us)
    ev = np.concatenate(vs)
    idx = np.lexsort((ev, eu))
    return eu[idx], ev[idx]


def bfs_scan_hyperbolic(cand_rt, frontier_rt, dmax, shell):
    """Candidates within dmax of the frontier; aborts with shell_hit=True
    once an accepted candidate reaches the shell radius."""
    nc = cand_rt.shape[0]
    if nc == 0 or frontier_rt.shape[0] == 0:
        return np.zeros(nc, bool), False
    coshD = np.cosh(dmax)
    fch = np.cosh(frontier_rt[:, 0])
    fsh = np.sinh(frontier_rt[:, 0])
    ft = frontier_rt[:, 1]
    accept = np.zeros(nc, bool)
    block = max(1, int(4e6) // max(frontier_rt.shape[0], 1))
    for lo in range(0, nc, block):
        hi = min(nc, lo + block)
        cr = cand_rt[lo:hi, 0]
        cd = _cosh_dist_fast(np.cosh(cr)[:, None], np.sinh(cr)[:, None],
                             cand_rt[lo:hi, 1][:, None],
                             fch[None, :], fsh[None, :], ft[None, :])
        acc = (cd <= coshD).any(axis=1)
        accept[lo:hi] = acc
        if np.any(acc & (cr >= shell)):
            return accept, True
    return accept, False


def assign_first_match_euclid(pts, centers, gamma):
    n = pts.shape[0]
    if n == 0 or centers.shape[0] == 0:
        return np.full(n, -1, np.int64)
    out = np.full(n, -1, np.int64)
    block = max(1, int(4e6) // max(centers.shape[0], 1))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        d2 = ((pts[lo:hi, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        hit = d2 < gamma * gamma
        any_hit = hit.any(axis=1)
        out[lo:hi][any_hit] = np.argmax(hit[any_hit], axis=1)
    return out


def assign_first_match_hyperbolic(pts, centers, gamma):
    n = pts.shape[0]
    if n == 0 or centers.shape[0] == 0:
        return np.full(n, -1, np.int64)
    coshG = np.cosh(gamma)
    out = np.full(n, -1, np.int64)
    block = max(1, int(4e6) // max(centers.shape[0], 1))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        cd = _cosh_dist_arr(pts[lo:hi, 0:1], pts[lo:hi, 1:2],
                            centers[None, :, 0], centers[None, :, 1])
        hit = cd < coshG
        any_hit = hit.any(axis=1)
        out[lo:hi][any_hit] = np.argmax(hit[any_hit], axis=1)
    return out


def near_any_hyperbolic(cand_rt, frontier_rt, dmax):
    nc = cand_rt.shape[0]
    if nc == 0 or frontier_rt.shape[0] == 0:
        return np.zeros(nc, bool)
    coshD = np.cosh(dmax)
    out = np.zeros(nc, bool)
    block = max(1, int(4e6) // max(frontier_rt.shape[0], 1))
    for lo in range(0, nc, block):
        hi = min(nc, lo + block)
        cd = _cosh_dist_arr(cand_rt[lo:hi, 0:1], cand_rt[lo:hi, 1:2],
                            frontier_rt[None, :, 0], frontier_rt[None, :, 1])
        out[lo:hi] = (cd <= coshD).any(axis=1)
    return out
