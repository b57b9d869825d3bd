"""Polar bucket decomposition of a hyperbolic window.

The window is split into radial bands and angular sectors whose measures are
known in closed form (sector measure = dtheta (cosh r_hi - cosh r_lo)), so
the restriction of a Poisson process to a bucket can be sampled lazily and
independently from a counter-based stream keyed by (seed, trial, bucket).
The component search then instantiates only the buckets it touches: the
crossing verdict needs the components of the core points, not the whole
realization, which is what keeps dense windows (millions of expected points)
affordable.
"""

import numpy as np

from . import kernels
from .rng import TAG_BUCKET, stream

TWO_PI = 2.0 * np.pi
_EPS = 1e-9


class HypBucketGrid:
    """Bands of height ~min(1, D/4) and sectors of arc length ~max(D, dr),
    covering radii [0, outer]."""

    def __init__(self, outer, D):
        self.outer = float(outer)
        self.D = float(D)
        dr = min(1.0, max(self.D / 4.0, 0.25))
        nb = max(1, int(np.ceil(self.outer / dr)))
        edges = np.minimum(np.arange(nb + 1) * dr, self.outer)
        self.edges = edges
        self.nbands = nb
        self.dband = int(np.ceil(self.D / dr)) + 1
        arc = max(self.D, dr)
        self.n_sec = np.maximum(
            1, (TWO_PI * np.sinh(edges[1:]) / arc).astype(np.int64))
        self.sec_width = TWO_PI / self.n_sec
        self.offsets = np.zeros(nb + 1, np.int64)
        self.offsets[1:] = np.cumsum(self.n_sec)
        self.total = int(self.offsets[-1])
        self.band_measure = TWO_PI * (np.cosh(edges[1:]) - np.cosh(edges[:-1]))
        self.bucket_measure = self.band_measure / self.n_sec
        self._coshD = np.cosh(self.D)
        self._reach_cache = {}

    def band_of(self, r):
        b = np.searchsorted(self.edges, r, side="right") - 1
        return np.clip(b, 0, self.nbands - 1)

    def band_of_gid(self, gid):
        return int(np.searchsorted(self.offsets, gid, side="right") - 1)

    def decompose(self, gid):
        b = self.band_of_gid(gid)
        return b, gid - int(self.offsets[b])

    def sample_bucket(self, gid, lam, seed, trial):
        """Poisson(lam * measure) points uniform in the bucket, drawn from
        the bucket's own stream."""
        b, s = self.decompose(gid)
        rng = stream(seed, TAG_BUCKET, trial, gid)
        n = int(rng.poisson(lam * self.bucket_measure[b]))
        if n == 0:
            return np.empty((0, 2))
        clo = np.cosh(self.edges[b])
        chi = np.cosh(self.edges[b + 1])
        r = np.arccosh(clo + rng.random(n) * (chi - clo))
        t = (s + rng.random(n)) * self.sec_width[b]
        return np.column_stack([r, t])

    def materialize(self, lam, seed, trial):
        """Full realization over every bucket, in canonical bucket order."""
        chunks = [self.sample_bucket(g, lam, seed, trial)
                  for g in range(self.total)]
        chunks = [c for c in chunks if len(c)]
        return np.concatenate(chunks) if chunks else np.empty((0, 2))

    def buckets_below(self, r):
        """All buckets in bands whose inner edge is <= r."""
        hi = int(np.searchsorted(self.edges[:-1], r, side="right") - 1)
        if hi < 0:
            return []
        hi = min(hi, self.nbands - 1)
        return list(range(0, int(self.offsets[hi + 1])))

    def _reach(self, b1, b2):
        """Conservative max angle between points of bands b1, b2 at distance
        <= D; None when the bands cannot interact, >= 2 pi for full circle."""
        key = (b1, b2)
        if key in self._reach_cache:
            return self._reach_cache[key]
        lo1, hi1 = self.edges[b1], self.edges[b1 + 1]
        lo2, hi2 = self.edges[b2], self.edges[b2 + 1]
        gap = max(0.0, lo2 - hi1, lo1 - hi2)
        if np.cosh(gap) > self._coshD:
            out = None
        else:
            den = 2.0 * np.sinh(max(lo1, _EPS)) * np.sinh(max(lo2, _EPS))
            s2 = (self._coshD - np.cosh(gap)) / den
            out = 7.0 if s2 >= 1.0 else 2.0 * np.arcsin(np.sqrt(s2))
        self._reach_cache[key] = out
        return out

    def candidate_buckets(self, frontier_rt):
        """Buckets that could contain a point within D of the frontier,
        grouped by band (conservative superset)."""
        r = frontier_rt[:, 0]
        t = frontier_rt[:, 1]
        bands = self.band_of(r)
        out = {}
        for b1 in np.unique(bands):
            th = t[bands == b1]
            s1 = np.unique((th / self.sec_width[b1]).astype(np.int64))
            s1 = np.clip(s1, 0, self.n_sec[b1] - 1)
            w1 = self.sec_width[b1]
            for b2 in range(max(0, b1 - self.dband),
                            min(self.nbands, b1 + self.dband + 1)):
                w = self._reach(b1, b2)
                if w is None:
                    continue
                n2 = int(self.n_sec[b2])
                if w >= np.pi or (w1 + 2 * w) >= TWO_PI:
                    secs = np.arange(n2, dtype=np.int64)
                else:
                    w2 = self.sec_width[b2]
                    lo = np.floor((s1 * w1 - w) / w2).astype(np.int64)
                    hi = np.floor(((s1 + 1) * w1 + w) / w2).astype(np.int64)
                    span = int((hi - lo).max()) + 1
                    grid = lo[:, None] + np.arange(span, dtype=np.int64)
                    secs = np.unique(grid[grid <= hi[:, None]] % n2)
                out.setdefault(b2, []).append(secs + int(self.offsets[b2]))
        return {b: np.unique(np.concatenate(v)) for b, v in out.items()}


def lazy_crossing(space, lam, radius, seed, trial, core_fraction=0.25,
                  grid=None):
    """Exact crossing verdict for one Poisson trial, exploring only the
    components of the core points (early exit at first shell contact)."""
    w = space.window
    L = w.radius
    D = 2.0 * radius
    core = core_fraction * L
    shell = L - radius
    if grid is None:
        grid = HypBucketGrid(w.outer, D)

    pts = {}
    unvis = {}

    def get(gid):
        if gid not in pts:
            rt = grid.sample_bucket(gid, lam, seed, trial)
            pts[gid] = rt
            unvis[gid] = np.ones(len(rt), bool)
        return pts[gid]

    chunks = []
    for gid in grid.buckets_below(core):
        rt = get(gid)
        m = unvis[gid] & (rt[:, 0] <= core)
        if m.any():
            unvis[gid][m] = False
            chunks.append(rt[m])
    if not chunks:
        return False
    frontier = np.concatenate(chunks)
    if (frontier[:, 0] >= shell).any():
        return True

    chunk_size = 256
    while len(frontier):
        by_band = grid.candidate_buckets(frontier)
        new_chunks = []
        for band in sorted(by_band, reverse=True):
            gids = by_band[band]
            blo = grid.edges[band] - D
            bhi = grid.edges[band + 1] + D
            fm = (frontier[:, 0] >= blo) & (frontier[:, 0] <= bhi)
            if not fm.any():
                continue
            fsub = frontier[fm]
            # chunked so the shell early-exit saves the remaining buckets
            for c0 in range(0, len(gids), chunk_size):
                crt = []
                prov = []
                for gid in gids[c0:c0 + chunk_size]:
                    rt = get(gid)
                    m = unvis[gid]
                    if m.any():
                        idx = np.flatnonzero(m)
                        crt.append(rt[idx])
                        prov.append((gid, idx))
                if not crt:
                    continue
                cand = np.concatenate(crt)
                acc, shell_hit = kernels.bfs_scan_hyperbolic(cand, fsub, D,
                                                             shell)
                if shell_hit:
                    return True
                if not acc.any():
                    continue
                off = 0
                for gid, idx in prov:
                    k = len(idx)
                    a = acc[off:off + k]
                    if a.any():
                        unvis[gid][idx[a]] = False
                        new_chunks.append(pts[gid][idx[a]])
                    off += k
        frontier = (np.concatenate(new_chunks) if new_chunks
                    else np.empty((0, 2)))
    return False
