"""Hot loops compiled with numba.

Semantics must match ``numpy_backend`` exactly: same edges, same canonical
component labels (smallest point index in the component), same assignment
indices. ``tests/test_kernels.py`` enforces the equivalence.
"""

import numpy as np
from numba import njit

NAME = "numba"

_EMPTY_I8 = np.empty(0, np.int64)
TWO_PI = 2.0 * np.pi


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def _union_labels(n, eu, ev):
    parent = np.arange(n)
    for k in range(eu.shape[0]):
        ra = _find(parent, eu[k])
        rb = _find(parent, ev[k])
        if ra == rb:
            continue
        if ra < rb:
            parent[rb] = ra
        else:
            parent[ra] = rb
    labels = np.empty(n, np.int64)
    for i in range(n):
        labels[i] = _find(parent, i)
    return labels


def union_labels(n, eu, ev):
    if n == 0:
        return _EMPTY_I8.copy()
    return _union_labels(n, np.ascontiguousarray(eu, np.int64),
                         np.ascontiguousarray(ev, np.int64))


@njit(cache=True)
def _grid_edges(x, y, rmax):
    n = x.shape[0]
    minx = x[0]
    miny = y[0]
    for i in range(n):
        if x[i] < minx:
            minx = x[i]
        if y[i] < miny:
            miny = y[i]
    inv = 1.0 / rmax
    cx = np.empty(n, np.int64)
    cy = np.empty(n, np.int64)
    ncx = 0
    ncy = 0
    for i in range(n):
        cx[i] = int((x[i] - minx) * inv)
        cy[i] = int((y[i] - miny) * inv)
        if cx[i] + 1 > ncx:
            ncx = cx[i] + 1
        if cy[i] + 1 > ncy:
            ncy = cy[i] + 1
    cid = cx * ncy + cy
    nbuck = ncx * ncy
    counts = np.zeros(nbuck + 1, np.int64)
    for i in range(n):
        counts[cid[i] + 1] += 1
    for b in range(nbuck):
        counts[b + 1] += counts[b]
    order = np.empty(n, np.int64)
    cursor = counts[:-1].copy()
    for i in range(n):
        order[cursor[cid[i]]] = i
        cursor[cid[i]] += 1
    r2 = rmax * rmax
    # pass 0 counts edges, pass 1 fills them
    nedges = 0
    eu = np.empty(0, np.int64)
    ev = np.empty(0, np.int64)
    for mode in range(2):
        if mode == 1:
            eu = np.empty(nedges, np.int64)
            ev = np.empty(nedges, np.int64)
        k = 0
        for i in range(n):
            bx = cx[i]
            by = cy[i]
            for dx in range(-1, 2):
                nx = bx + dx
                if nx < 0 or nx >= ncx:
                    continue
                for dy in range(-1, 2):
                    ny = by + dy
                    if ny < 0 or ny >= ncy:
                        continue
                    b = nx * ncy + ny
                    for s in range(counts[b], counts[b + 1]):
                        j = order[s]
                        if j <= i:
                            continue
                        ddx = x[i] - x[j]
                        ddy = y[i] - y[j]
                        if ddx * ddx + ddy * ddy <= r2:
                            if mode == 1:
                                eu[k] = i
                                ev[k] = j
                            k += 1
        if mode == 0:
            nedges = k
    return eu, ev


def edges_within_euclid(xy, rmax):
    """Index pairs (i<j) with Euclidean distance <= rmax (closed balls)."""
    n = xy.shape[0]
    if n < 2:
        return _EMPTY_I8.copy(), _EMPTY_I8.copy()
    xy = np.ascontiguousarray(xy, np.float64)
    eu, ev = _grid_edges(xy[:, 0], xy[:, 1], float(rmax))
    idx = np.lexsort((ev, eu))
    return eu[idx], ev[idx]


@njit(cache=True, inline="always")
def _cosh_dist(r1, t1, r2, t2):
    # cosh d = cosh(r1-r2) + 2 sinh r1 sinh r2 sin^2((t1-t2)/2); no cancellation
    s = np.sin(0.5 * (t1 - t2))
    return np.cosh(r1 - r2) + 2.0 * np.sinh(r1) * np.sinh(r2) * s * s


@njit(cache=True)
def _reach_bounds(rs, D, coshD):
    # conservative angular reach per point: any partner within D lies inside
    # +- reach in angle (full circle encoded as > 2 pi)
    n = rs.shape[0]
    reach = np.empty(n)
    for i in range(n):
        a = rs[i] - D
        if a <= 1e-3:
            reach[i] = 7.0
            continue
        s2 = (coshD - 1.0) / (2.0 * np.sinh(rs[i]) * np.sinh(a))
        if s2 >= 1.0:
            reach[i] = 7.0
        else:
            reach[i] = 2.0 * np.arcsin(np.sqrt(s2))
    return reach


@njit(cache=True)
def _edges_hyp_sorted(r, t, coshD, D):
    n = r.shape[0]
    order = np.argsort(t, kind="mergesort")
    rs = np.empty(n)
    ts = np.empty(n)
    for k in range(n):
        rs[k] = r[order[k]]
        ts[k] = t[order[k]]
    ch = np.cosh(rs)
    sh = np.sinh(rs)
    reach = _reach_bounds(rs, D, coshD)
    nedges = 0
    eu = np.empty(0, np.int64)
    ev = np.empty(0, np.int64)
    for mode in range(2):
        if mode == 1:
            eu = np.empty(nedges, np.int64)
            ev = np.empty(nedges, np.int64)
        k = 0
        for i in range(n):
            j = i + 1
            while j < n and ts[j] - ts[i] <= reach[i]:
                cd = ch[i] * ch[j] - sh[i] * sh[j] * np.cos(ts[i] - ts[j])
                if cd <= coshD:
                    if mode == 1:
                        a = order[i]
                        b = order[j]
                        if a < b:
                            eu[k] = a
                            ev[k] = b
                        else:
                            eu[k] = b
                            ev[k] = a
                    k += 1
                j += 1
            # wraparound segment; skip pairs the forward scan already saw
            if ts[i] + reach[i] > TWO_PI:
                lim = ts[i] + reach[i] - TWO_PI
                j = 0
                while j < i and ts[j] <= lim:
                    if ts[i] - ts[j] > reach[j]:
                        cd = (ch[i] * ch[j]
                              - sh[i] * sh[j] * np.cos(ts[i] - ts[j]))
                        if cd <= coshD:
                            if mode == 1:
                                a = order[i]
                                b = order[j]
                                if a < b:
                                    eu[k] = a
                                    ev[k] = b
                                else:
                                    eu[k] = b
                                    ev[k] = a
                            k += 1
                    j += 1
        if mode == 0:
            nedges = k
    return eu, ev



def edges_within_hyperbolic(rt, dmax):
    """Index pairs (i<j) with hyperbolic distance <= dmax."""
    n = rt.shape[0]
    if n < 2:
        return _EMPTY_I8.copy(), _EMPTY_I8.copy()
    rt = np.ascontiguousarray(rt, np.float64)
    eu, ev = _edges_hyp_sorted(rt[:, 0], rt[:, 1], float(np.cosh(dmax)),
                               float(dmax))
    idx = np.lexsort((ev, eu))
    return eu[idx], ev[idx]


@njit(cache=True)
def _bfs_scan(c_r, c_t, f_r, f_t, coshD, shell):
    accept = np.zeros(c_r.shape[0], np.bool_)
    for i in range(c_r.shape[0]):
        ci = np.cosh(c_r[i])
        si = np.sinh(c_r[i])
        for j in range(f_r.shape[0]):
            cd = (ci * np.cosh(f_r[j])
                  - si * np.sinh(f_r[j]) * np.cos(c_t[i] - f_t[j]))
            if cd <= coshD:
                accept[i] = True
                if c_r[i] >= shell:
                    return accept, True
                break
    return accept, False


def bfs_scan_hyperbolic(cand_rt, frontier_rt, dmax, shell):
    """Candidates within dmax of the frontier; aborts with shell_hit=True the
    moment an accepted candidate reaches the shell radius."""
    if cand_rt.shape[0] == 0 or frontier_rt.shape[0] == 0:
        return np.zeros(cand_rt.shape[0], bool), False
    cand_rt = np.ascontiguousarray(cand_rt, np.float64)
    frontier_rt = np.ascontiguousarray(frontier_rt, np.float64)
    return _bfs_scan(cand_rt[:, 0], cand_rt[:, 1], frontier_rt[:, 0],
                     frontier_rt[:, 1], float(np.cosh(dmax)), float(shell))


@njit(cache=True)
def _assign_grid_euclid(px, py, qx, qy, gamma, minx, miny, ncx, ncy,
                        counts, order):
    n = px.shape[0]
    out = np.full(n, -1, np.int64)
    inv = 1.0 / gamma
    g2 = gamma * gamma
    for i in range(n):
        bx = int((px[i] - minx) * inv)
        by = int((py[i] - miny) * inv)
        best = -1
        for dx in range(-1, 2):
            nx = bx + dx
            if nx < 0 or nx >= ncx:
                continue
            for dy in range(-1, 2):
                ny = by + dy
                if ny < 0 or ny >= ncy:
                    continue
                b = nx * ncy + ny
                for s in range(counts[b], counts[b + 1]):
                    j = order[s]
                    ddx = px[i] - qx[j]
                    ddy = py[i] - qy[j]
                    if ddx * ddx + ddy * ddy < g2:
                        if best < 0 or j < best:
                            best = j
        out[i] = best
    return out


def assign_first_match_euclid(pts, centers, gamma):
    """First center index with d(center, p) < gamma, -1 when uncovered."""
    n = pts.shape[0]
    if n == 0 or centers.shape[0] == 0:
        return np.full(n, -1, np.int64)
    pts = np.ascontiguousarray(pts, np.float64)
    centers = np.ascontiguousarray(centers, np.float64)
    gamma = float(gamma)
    allx = np.concatenate([pts[:, 0], centers[:, 0]])
    ally = np.concatenate([pts[:, 1], centers[:, 1]])
    minx = float(allx.min())
    miny = float(ally.min())
    cx = ((centers[:, 0] - minx) / gamma).astype(np.int64)
    cy = ((centers[:, 1] - miny) / gamma).astype(np.int64)
    ncx = int(max(((allx.max() - minx) / gamma) + 1, cx.max() + 1))
    ncy = int(max(((ally.max() - miny) / gamma) + 1, cy.max() + 1))
    cid = cx * ncy + cy
    counts = np.zeros(ncx * ncy + 1, np.int64)
    np.add.at(counts, cid + 1, 1)
    counts = np.cumsum(counts)
    order = np.argsort(cid, kind="stable").astype(np.int64)
    return _assign_grid_euclid(pts[:, 0], pts[:, 1],
                               centers[:, 0], centers[:, 1], gamma,
                               minx, miny, ncx, ncy, counts, order)


@njit(cache=True)
def _assign_brute_hyp(pr, pt, qr, qt, gamma):
    n = pr.shape[0]
    m = qr.shape[0]
    coshG = np.cosh(gamma)
    out = np.full(n, -1, np.int64)
    for i in range(n):
        for j in range(m):
            if _cosh_dist(pr[i], pt[i], qr[j], qt[j]) < coshG:
                out[i] = j
                break
    return out


def assign_first_match_hyperbolic(pts, centers, gamma):
    n = pts.shape[0]
    if n == 0 or centers.shape[0] == 0:
        return np.full(n, -1, np.int64)
    pts = np.ascontiguousarray(pts, np.float64)
    centers = np.ascontiguousarray(centers, np.float64)
    return _assign_brute_hyp(pts[:, 0], pts[:, 1],
                             centers[:, 0], centers[:, 1], float(gamma))


@njit(cache=True)
def _near_any_hyp(cr, ct, fr, ft, coshD):
    n = cr.shape[0]
    out = np.zeros(n, np.bool_)
    for i in range(n):
        for j in range(fr.shape[0]):
            if _cosh_dist(cr[i], ct[i], fr[j], ft[j]) <= coshD:
                out[i] = True
                break
    return out


def near_any_hyperbolic(cand_rt, frontier_rt, dmax):
    """Mask of candidates within dmax of at least one frontier point."""
    if cand_rt.shape[0] == 0 or frontier_rt.shape[0] == 0:
        return np.zeros(cand_rt.shape[0], bool)
    cand_rt = np.ascontiguousarray(cand_rt, np.float64)
    frontier_rt = np.ascontiguousarray(frontier_rt, np.float64)
    return _near_any_hyp(cand_rt[:, 0], cand_rt[:, 1],
                         frontier_rt[:, 0], frontier_rt[:, 1],
                         float(np.cosh(dmax)))
