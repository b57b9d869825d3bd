"""Metric-measure spaces, windows, and the greedy disjoint covering.

Four space kinds share one duck-typed interface: the Euclidean plane and the
hyperbolic plane (polar coordinates about the window center) live here; the
two graph kinds (Cayley graphs, net graphs) live in ``groups``. All
simulation happens inside a bounded metric ball window, sampled on
window + padding so that boundary balls behave correctly.

Hyperbolic model: polar coordinates (r, theta) with
cosh d = cosh(r1 - r2) + 2 sinh r1 sinh r2 sin^2((t1 - t2)/2)
and area element sinh(r) dr dtheta, so a ball of radius r has measure
2 pi (cosh r - 1).
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateCellError, ForeignPointError, PercolabError

TWO_PI = 2.0 * np.pi

# greedy net construction: stop after this many consecutive rejections
NET_REJECTION_CUTOFF = 1000
# verification sample used to repair coverage holes left by the cutoff
COVER_REPAIR_SAMPLES = 40000
DEFAULT_MEASURE_SAMPLES = 10000


@dataclass(frozen=True)
class Point:
    """Kind-tagged point, for the public distance API."""
    kind: str
    data: object


@dataclass(frozen=True)
class WindowSpec:
    """Metric ball window of radius L with sampling margin ``padding``."""
    radius: float
    padding: float = 0.0
    center: object = None

    def __post_init__(self):
        if not self.radius > 0:
            raise PercolabError("window radius must be positive")
        if self.padding < 0:
            raise PercolabError("window padding must be non-negative")

    @property
    def outer(self):
        return self.radius + self.padding


class EuclideanPlane:
    """The plane with Lebesgue measure, windowed to a disk about the origin."""

    kind = "euclidean"
    is_graph = False

    def __init__(self, window):
        if isinstance(window, (int, float)):
            window = WindowSpec(float(window))
        self.window = window

    def with_window(self, radius=None, padding=None):
        w = self.window
        return EuclideanPlane(WindowSpec(
            radius if radius is not None else w.radius,
            padding if padding is not None else w.padding))

    def distance(self, p, q):
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        return float(np.hypot(p[0] - q[0], p[1] - q[1]))

    def measure_ball(self, center, r):
        return np.pi * r * r

    def window_measure(self, padded=True):
        return np.pi * (self.window.outer if padded else self.window.radius) ** 2

    def center_distances(self, P):
        P = np.atleast_2d(np.asarray(P, float))
        return np.hypot(P[:, 0], P[:, 1])

    def contains(self, P, padded=True):
        lim = self.window.outer if padded else self.window.radius
        return self.center_distances(P) <= lim

    def sample_window(self, rng, n, padded=True):
        lim = self.window.outer if padded else self.window.radius
        r = lim * np.sqrt(rng.random(n))
        t = TWO_PI * rng.random(n)
        return np.column_stack([r * np.cos(t), r * np.sin(t)])

    def sample_ball(self, center, radius, rng, n):
        center = np.asarray(center, float)
        r = radius * np.sqrt(rng.random(n))
        t = TWO_PI * rng.random(n)
        return center[None, :] + np.column_stack([r * np.cos(t), r * np.sin(t)])

    def sample_boundary(self, rng, n, padded=True):
        lim = self.window.outer if padded else self.window.radius
        t = TWO_PI * rng.random(n)
        return np.column_stack([lim * np.cos(t), lim * np.sin(t)])

    def edges_within(self, P, dmax):
        return kernels.edges_within_euclid(np.atleast_2d(P), dmax)

    def assign_first_match(self, P, centers, gamma):
        return kernels.assign_first_match_euclid(
            np.atleast_2d(np.asarray(P, float)), np.atleast_2d(centers), gamma)


def hyperbolic_cosh_dist(r1, t1, r2, t2):
    """cosh of the hyperbolic distance; cancellation-free for large radii."""
    s = np.sin(0.5 * (t1 - t2))
    return np.cosh(r1 - r2) + 2.0 * np.sinh(r1) * np.sinh(r2) * s * s


class HyperbolicDisk:
    """Hyperbolic plane (curvature -1) windowed to a disk about the origin."""

    kind = "hyperbolic"
    is_graph = False

    def __init__(self, window):
        if isinstance(window, (int, float)):
            window = WindowSpec(float(window))
        self.window = window

    def with_window(self, radius=None, padding=None):
        w = self.window
        return HyperbolicDisk(WindowSpec(
            radius if radius is not None else w.radius,
            padding if padding is not None else w.padding))

    def distance(self, p, q):
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        cd = hyperbolic_cosh_dist(p[0], p[1], q[0], q[1])
        return float(np.arccosh(max(cd, 1.0)))

    def measure_ball(self, center, r):
        return TWO_PI * (np.cosh(r) - 1.0)

    def window_measure(self, padded=True):
        lim = self.window.outer if padded else self.window.radius
        return TWO_PI * (np.cosh(lim) - 1.0)

    def center_distances(self, P):
        P = np.atleast_2d(np.asarray(P, float))
        return P[:, 0].copy()

    def contains(self, P, padded=True):
        lim = self.window.outer if padded else self.window.radius
        return self.center_distances(P) <= lim

    def _sample_radii(self, rng, n, rlo, rhi):
        # radial CDF on [rlo, rhi] is (cosh r - cosh rlo)/(cosh rhi - cosh rlo)
        u = rng.random(n)
        return np.arccosh(np.cosh(rlo) + u * (np.cosh(rhi) - np.cosh(rlo)))

    def sample_window(self, rng, n, padded=True):
        lim = self.window.outer if padded else self.window.radius
        r = self._sample_radii(rng, n, 0.0, lim)
        t = TWO_PI * rng.random(n)
        return np.column_stack([r, t])

    def sample_ball(self, center, radius, rng, n):
        center = np.asarray(center, float)
        r0, t0 = float(center[0]), float(center[1])
        if r0 < 1e-12:
            r = self._sample_radii(rng, n, 0.0, radius)
            t = TWO_PI * rng.random(n)
            return np.column_stack([r, t])
        # rejection from the polar bounding box of the ball
        rlo = max(0.0, r0 - radius)
        rhi = r0 + radius
        if np.sinh(r0) > np.sinh(radius):
            tmax = np.arcsin(np.sinh(radius) / np.sinh(r0))
        else:
            tmax = np.pi
        out = np.empty((n, 2))
        got = 0
        cosh_rad = np.cosh(radius)
        while got < n:
            m = max(64, int(1.8 * (n - got)))
            r = self._sample_radii(rng, m, rlo, rhi)
            t = t0 + tmax * (2.0 * rng.random(m) - 1.0)
            ok = hyperbolic_cosh_dist(r, t, r0, t0) <= cosh_rad
            take = min(int(ok.sum()), n - got)
            out[got:got + take, 0] = r[ok][:take]
            out[got:got + take, 1] = np.mod(t[ok][:take], TWO_PI)
            got += take
        return out

    def sample_boundary(self, rng, n, padded=True):
        lim = self.window.outer if padded else self.window.radius
        return np.column_stack([np.full(n, lim), TWO_PI * rng.random(n)])

    def edges_within(self, P, dmax):
        return kernels.edges_within_hyperbolic(np.atleast_2d(P), dmax)

    def assign_first_match(self, P, centers, gamma):
        return kernels.assign_first_match_hyperbolic(
            np.atleast_2d(np.asarray(P, float)), np.atleast_2d(centers), gamma)


@dataclass
class Cell:
    """One cell K_i of a disjoint covering, with its reference measure and
    (once induced by a quasi-isometry) the pulled-back measure."""
    index: int
    center: object
    measure_prime: float
    measure_star: float = 0.0
    partition: object = field(default=None, repr=False)


class CellPartition:
    """Greedy disjoint covering: a point belongs to cell i iff i is the first
    net index with d(y_i, p) < gamma. Cells therefore sit inside B(y_i, gamma)
    and have diameter at most 2 gamma."""

    def __init__(self, space, gamma, centers, measures, trivial=False):
        self.space = space
        self.gamma = float(gamma)
        self.centers = centers
        self.trivial = trivial
        self.dropped_cells = 0
        self.cells = [Cell(i, self._center(i), float(m), 0.0, self)
                      for i, m in enumerate(measures)]

    def _center(self, i):
        c = self.centers[i]
        return np.array(c, float) if not self.space.is_graph else int(c)

    def __len__(self):
        return len(self.cells)

    @property
    def net(self):
        return self.centers

    @property
    def measure_prime(self):
        return np.array([c.measure_prime for c in self.cells])

    @property
    def measure_star(self):
        return np.array([c.measure_star for c in self.cells])

    @classmethod
    def trivial_for(cls, space):
        """Single cell spanning the whole padded window."""
        if space.is_graph:
            center = [space.center_vertex()]
        else:
            center = np.zeros((1, 2))
        gamma = space.window.outer * 2.0 + 1.0
        return cls(space, gamma, center,
                   [space.window_measure(padded=True)], trivial=True)

    def assign(self, P):
        """Cell index per point, -1 when uncovered."""
        space = self.space
        if self.trivial:
            P2 = np.atleast_2d(P) if not space.is_graph else np.atleast_1d(P)
            inside = space.contains(P2, padded=True)
            return np.where(inside, 0, -1).astype(np.int64)
        if space.is_graph:
            return space.assign_first_match(np.atleast_1d(P), self.centers,
                                            self.gamma)
        return space.assign_first_match(P, self.centers, self.gamma)

    def sample_in_cell(self, index, rng, n=1):
        """Uniform (w.r.t. the reference measure) draws from one cell."""
        cell = self.cells[index]
        if cell.measure_prime <= 0:
            raise DegenerateCellError(f"degenerate cell {index}")
        space = self.space
        if self.trivial:
            return space.sample_window(rng, n, padded=True)
        if space.is_graph:
            vids = self._cell_vertices(index)
            if len(vids) == 0:
                raise DegenerateCellError(f"degenerate cell {index}")
            return vids[rng.integers(0, len(vids), n)]
        out = np.empty((n, 2))
        got = 0
        attempts = 0
        while got < n:
            m = max(64, 2 * (n - got))
            cand = space.sample_ball(cell.center, self.gamma, rng, m)
            ok = space.contains(cand, padded=True)
            ok &= self.assign(cand) == index
            take = min(int(ok.sum()), n - got)
            out[got:got + take] = cand[ok][:take]
            got += take
            attempts += m
            if attempts > 200 * max(n, 50) and got == 0:
                raise DegenerateCellError(f"degenerate cell {index}")
        return out

    def _cell_vertices(self, index):
        space = self.space
        if not hasattr(self, "_vertex_assign"):
            ids = space.window_vertices(padded=True)
            self._vertex_assign = (ids, self.assign(ids))
        ids, lab = self._vertex_assign
        return ids[lab == index]


def greedy_separated_set(space, accept_dist, cover_dist, rng):
    """Greedy packing of the padded window: candidates are accepted at
    distance >= accept_dist from all accepted centers until
    NET_REJECTION_CUTOFF consecutive rejections, then verification samples
    patch any residual hole of radius cover_dist."""
    centers = []
    arr = np.empty((0, 2))
    rejections = 0
    while rejections < NET_REJECTION_CUTOFF:
        cand = space.sample_window(rng, 64, padded=True)
        for p in cand:
            if len(centers) == 0:
                centers.append(p)
                arr = np.array(centers)
                rejections = 0
                continue
            if space.kind == "euclidean":
                d = np.hypot(arr[:, 0] - p[0], arr[:, 1] - p[1]).min()
            else:
                cd = hyperbolic_cosh_dist(arr[:, 0], arr[:, 1], p[0], p[1])
                d = np.arccosh(max(cd.min(), 1.0))
            if d >= accept_dist:
                centers.append(p)
                arr = np.array(centers)
                rejections = 0
            else:
                rejections += 1
                if rejections >= NET_REJECTION_CUTOFF:
                    break
    return _repair_cover(space, arr, cover_dist, rng)


def _repair_cover(space, centers, cover_dist, rng):
    """Append centers until verification samples find no point farther than
    cover_dist from the set. The window boundary circle is probed explicitly:
    residual holes concentrate on the rim, where no center can sit beyond."""
    centers = list(centers)
    arr = np.array(centers) if centers else np.empty((0, 2))
    for _ in range(8):
        probe = np.concatenate([
            space.sample_window(rng, COVER_REPAIR_SAMPLES, padded=True),
            space.sample_boundary(rng, COVER_REPAIR_SAMPLES // 4,
                                  padded=True)])
        lab = space.assign_first_match(probe, arr, cover_dist)
        holes = probe[lab < 0]
        if len(holes) == 0:
            break
        for p in holes:
            lab_p = space.assign_first_match(p[None, :], arr, cover_dist)
            if lab_p[0] < 0:
                centers.append(p)
                arr = np.array(centers)
    return arr


def _measure_cells_continuum(space, centers, gamma, rng, samples_per_cell):
    ball = space.measure_ball(None, gamma)
    out = np.empty(len(centers))
    chunk = max(1, int(2e6) // max(samples_per_cell, 1))
    for lo in range(0, len(centers), chunk):
        hi = min(len(centers), lo + chunk)
        pts = []
        for i in range(lo, hi):
            pts.append(space.sample_ball(centers[i], gamma, rng,
                                         samples_per_cell))
        pts = np.concatenate(pts)
        inside = space.contains(pts, padded=True)
        lab = space.assign_first_match(pts, centers, gamma)
        for i in range(lo, hi):
            sl = slice((i - lo) * samples_per_cell,
                       (i - lo + 1) * samples_per_cell)
            hits = int(np.count_nonzero(inside[sl] & (lab[sl] == i)))
            out[i] = ball * hits / samples_per_cell
    return out


def build_window_partition(space, gamma, rng,
                           measure_samples=DEFAULT_MEASURE_SAMPLES):
    """Greedy ball-difference covering of the padded window.

    Net centers are accepted at pairwise distance >= gamma/2 until
    NET_REJECTION_CUTOFF consecutive candidates fail, then verified and
    patched so every sampled window point lies within gamma of the net.
    Continuum cell measures are stratified Monte Carlo over each center ball
    (``measure_samples`` draws per cell); graph cell measures are exact
    vertex counts. Cells whose estimated measure is zero (fully eclipsed by
    earlier balls) are dropped.
    """
    if not gamma > 0:
        raise PercolabError("gamma must be positive")
    if space.is_graph:
        ids = space.window_vertices(padded=True)
        perm = rng.permutation(len(ids))
        if gamma <= 1.0:
            centers = ids[perm]
        else:
            centers = []
            for vid in ids[perm]:
                if not centers:
                    centers.append(int(vid))
                    continue
                d = space.distance_ids(np.full(len(centers), vid),
                                       np.array(centers, np.int64)).min()
                if d >= 0.5 * gamma:
                    centers.append(int(vid))
            centers = np.array(centers, np.int64)
            uncovered = space.assign_first_match(ids, centers, gamma) < 0
            for vid in ids[uncovered]:
                centers = np.append(centers, int(vid))
        lab = space.assign_first_match(ids, centers, gamma)
        counts = np.bincount(lab[lab >= 0], minlength=len(centers))
        keep = counts > 0
        part = CellPartition(space, gamma, centers[keep],
                             counts[keep].astype(float))
        part.dropped_cells = int((~keep).sum())
        return part

    centers = greedy_separated_set(space, 0.5 * gamma, gamma, rng)
    dropped = 0
    for _ in range(4):
        measures = _measure_cells_continuum(space, centers, gamma, rng,
                                            measure_samples)
        bad = measures <= 0.0
        if not bad.any():
            break
        # fully eclipsed cells are dropped; any orphaned pocket they leave
        # is patched with a fresh center and everything re-measured
        dropped += int(bad.sum())
        centers = _repair_cover(space, centers[~bad], gamma, rng)
    else:
        measures = _measure_cells_continuum(space, centers, gamma, rng,
                                            measure_samples)
    keep = measures > 0
    dropped += int((~keep).sum())
    part = CellPartition(space, gamma, centers[keep], measures[keep])
    part.dropped_cells = dropped
    return part


def _unwrap(space, p):
    if isinstance(p, Point):
        if p.kind != space.kind:
            raise ForeignPointError(
                f"foreign point: {p.kind} point in {space.kind} space")
        return p.data
    return p


def distance(space, p, q):
    """Metric distance between two points of ``space``."""
    return space.distance(_unwrap(space, p), _unwrap(space, q))


def measure_ball(space, center, r):
    """Reference measure of the metric ball B(center, r)."""
    if r < 0:
        raise PercolabError("ball radius must be non-negative")
    return space.measure_ball(_unwrap(space, center) if center is not None
                              else None, r)


def sample_uniform_in_cell(space, cell, rng, n=1):
    """Draw from the reference measure restricted to a cell, normalized."""
    if cell.partition is None or cell.partition.space is not space:
        raise ForeignPointError("cell does not belong to this space")
    return cell.partition.sample_in_cell(cell.index, rng, n)
