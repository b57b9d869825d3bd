"""Cayley graphs, word metrics, separated nets, and growth estimation.

Group elements use canonical forms so breadth-first search dedup is exact:
integer vectors for free abelian groups, freely reduced words (tuples of
signed generator indices) for free groups, and integer triples (a, b, c)
with (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b') for the discrete
Heisenberg group.
"""

import numpy as np

from .errors import PercolabError
from .spaces import WindowSpec, greedy_separated_set, COVER_REPAIR_SAMPLES

MAX_BALL = 6_000_000
# net centers are accepted at 1.8*epsilon: still epsilon-separated, and the
# resulting cover radius stays safely below the 2*epsilon contract
NET_ACCEPT_FACTOR = 1.8


class GroupSpec:
    """Finitely generated group with a fixed symmetric generating set."""

    def __init__(self, kind, rank, generators):
        self.kind = kind
        self.rank = rank
        self.generators = tuple(tuple(g) for g in generators)
        ident = self.identity
        gens = set(self.generators)
        if ident in gens:
            raise PercolabError("identity must not be a generator")
        for g in self.generators:
            if self.inv(g) not in gens:
                raise PercolabError("generating set must be symmetric")
        self._dist = {ident: 0}
        self._frontier = [ident]
        self._radius = 0

    @property
    def identity(self):
        if self.kind == "free":
            return ()
        return (0,) * (3 if self.kind == "heisenberg" else self.rank)

    def mul(self, g, h):
        if self.kind == "zd":
            return tuple(a + b for a, b in zip(g, h))
        if self.kind == "heisenberg":
            return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])
        out = list(g)
        for s in h:
            if out and out[-1] == -s:
                out.pop()
            else:
                out.append(s)
        return tuple(out)

    def inv(self, g):
        if self.kind == "zd":
            return tuple(-a for a in g)
        if self.kind == "heisenberg":
            return (-g[0], -g[1], -g[2] + g[0] * g[1])
        return tuple(-s for s in reversed(g))

    def _grow_layer(self):
        nxt = []
        d = self._radius + 1
        for g in self._frontier:
            for s in self.generators:
                h = self.mul(g, s)
                if h not in self._dist:
                    self._dist[h] = d
                    nxt.append(h)
        self._frontier = nxt
        self._radius = d
        if len(self._dist) > MAX_BALL:
            raise PercolabError("ball too large")

    def grow_to(self, n):
        while self._radius < n and self._frontier:
            self._grow_layer()

    def norm(self, g, bound=512):
        """Word length of g; BFS from the identity."""
        g = tuple(g)
        while g not in self._dist:
            if self._radius >= bound or not self._frontier:
                raise PercolabError("radius exceeded")
            self._grow_layer()
        return self._dist[g]

    def ball(self, n):
        """Elements with word norm <= n, in breadth-first order."""
        self.grow_to(n)
        return [g for g, d in self._dist.items() if d <= n]

    def ball_size(self, n):
        return len(self.ball(n))


def zd_standard(d=2):
    gens = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        gens.append(tuple(e))
        e2 = [0] * d
        e2[i] = -1
        gens.append(tuple(e2))
    return GroupSpec("zd", d, gens)


def z2_standard():
    return zd_standard(2)


def z2_king():
    gens = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
            if (dx, dy) != (0, 0)]
    return GroupSpec("zd", 2, gens)


def free_group(k=2):
    gens = [(i,) for i in range(1, k + 1)] + [(-i,) for i in range(1, k + 1)]
    return GroupSpec("free", k, gens)


def heisenberg():
    gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    return GroupSpec("heisenberg", 2, gens)


def word_distance(group, g, h, bound=512):
    """d_S(g, h) = word norm of g^{-1} h."""
    return group.norm(group.mul(group.inv(tuple(g)), tuple(h)), bound)


def cayley_ball(group, n):
    if n < 0:
        raise PercolabError("ball radius must be non-negative")
    return group.ball(n)


class _GraphSpaceBase:
    """Shared machinery for graph-kind spaces (counting measure, vertex ids)."""

    is_graph = True

    # subclasses set: window, _norms (distance from center per vertex)

    def window_vertices(self, padded=True):
        lim = self.window.outer if padded else self.window.radius
        return np.flatnonzero(self._norms <= lim).astype(np.int64)

    def vertex_count(self, padded=True):
        lim = self.window.outer if padded else self.window.radius
        return int(np.count_nonzero(self._norms <= lim))

    def window_measure(self, padded=True):
        return float(self.vertex_count(padded))

    def center_distances(self, P):
        return self._norms[np.atleast_1d(P).astype(np.int64)].astype(float)

    def contains(self, P, padded=True):
        lim = self.window.outer if padded else self.window.radius
        return self.center_distances(P) <= lim

    def sample_window(self, rng, n, padded=True):
        count = self.vertex_count(padded)
        return rng.integers(0, count, n).astype(np.int64)

    def assign_first_match(self, P, centers, gamma):
        P = np.atleast_1d(P).astype(np.int64)
        centers = np.atleast_1d(centers).astype(np.int64)
        out = np.full(len(P), -1, np.int64)
        ok = (P >= 0) & (P < self._n_vertices)
        if gamma <= 1.0:
            # d(y, p) < 1 on a graph means y == p
            inv = np.full(self._n_vertices, -1, np.int64)
            inv[centers] = np.arange(len(centers))
            out[ok] = inv[P[ok]]
            return out
        for i in np.flatnonzero(ok):
            d = self.distance_ids(np.full(len(centers), P[i], np.int64),
                                  centers)
            hit = np.flatnonzero(d < gamma)
            if len(hit):
                out[i] = hit[0]
        return out

    def edges_within(self, P, dmax):
        """All index pairs (i<j) of P (vertex ids) at graph distance <= dmax."""
        P = np.atleast_1d(P).astype(np.int64)
        n = len(P)
        if n < 2:
            e = np.empty(0, np.int64)
            return e, e.copy()
        indptr, indices = self.neighborhood_csr(int(np.floor(dmax)))
        order = np.argsort(P, kind="stable")
        sorted_v = P[order]
        us, vs = [], []
        # co-located points (duplicate vertices) are at distance 0
        start = 0
        for end in range(1, n + 1):
            if end == n or sorted_v[end] != sorted_v[start]:
                if end - start > 1:
                    grp = np.sort(order[start:end])
                    for a in range(len(grp)):
                        for b in range(a + 1, len(grp)):
                            us.append(int(grp[a]))
                            vs.append(int(grp[b]))
                start = end
        for i in range(n):
            nb = indices[indptr[P[i]]:indptr[P[i] + 1]]
            pos = np.searchsorted(sorted_v, nb)
            for k, v in zip(pos, nb):
                kk = k
                while kk < n and sorted_v[kk] == v:
                    j = order[kk]
                    if j > i:
                        us.append(i)
                        vs.append(int(j))
                    kk += 1
        if not us:
            e = np.empty(0, np.int64)
            return e, e.copy()
        return np.array(us, np.int64), np.array(vs, np.int64)


class CayleyGraph(_GraphSpaceBase):
    """Cayley graph of a finitely generated group, windowed to a word-metric
    ball about the identity, with the counting measure."""

    kind = "cayley"

    def __init__(self, group, window):
        if isinstance(window, (int, float)):
            window = WindowSpec(float(window))
        self.group = group
        self.window = window
        r_out = int(np.floor(window.outer))
        elems = group.ball(r_out)
        self.elements = elems
        self.index = {g: i for i, g in enumerate(elems)}
        self._n_vertices = len(elems)
        self._norms = np.array([group._dist[g] for g in elems], float)
        self._coords = None
        if group.kind in ("zd", "heisenberg"):
            self._coords = np.array(elems, np.int64)
        self._csr_cache = {}
        self._grid_cache = None

    def with_window(self, radius=None, padding=None):
        w = self.window
        return CayleyGraph(self.group, WindowSpec(
            radius if radius is not None else w.radius,
            padding if padding is not None else w.padding))

    def center_vertex(self):
        return 0

    def _as_element(self, p):
        if isinstance(p, (int, np.integer)):
            return self.elements[int(p)]
        return tuple(int(x) for x in p)

    def distance(self, p, q):
        bound = max(64, 4 * int(self.window.outer) + 4)
        return float(word_distance(self.group, self._as_element(p),
                                   self._as_element(q), bound))

    def distance_ids(self, u_ids, v_ids):
        """Elementwise word distances between vertex id arrays."""
        u_ids = np.atleast_1d(u_ids).astype(np.int64)
        v_ids = np.atleast_1d(v_ids).astype(np.int64)
        g = self.group
        out = np.empty(len(u_ids), float)
        bound = max(64, 4 * int(self.window.outer) + 4)
        for i in range(len(u_ids)):
            out[i] = g.norm(g.mul(g.inv(self.elements[u_ids[i]]),
                                  self.elements[v_ids[i]]), bound)
        return out

    def measure_ball(self, center, r):
        if r < 0:
            raise PercolabError("ball radius must be non-negative")
        return float(self.group.ball_size(int(np.floor(r))))

    def _vertex_grid(self):
        # dense coord -> vertex id lookup (zd / heisenberg only)
        if self._grid_cache is None:
            c = self._coords
            lo = c.min(axis=0)
            hi = c.max(axis=0)
            shape = tuple((hi - lo + 1).tolist())
            grid = np.full(shape, -1, np.int64)
            grid[tuple((c - lo).T)] = np.arange(len(c))
            self._grid_cache = (lo, grid)
        return self._grid_cache

    def neighborhood_csr(self, radius):
        """CSR arrays: for each vertex, in-window vertices at word distance
        in [1, radius]."""
        radius = int(radius)
        if radius in self._csr_cache:
            return self._csr_cache[radius]
        if radius <= 0:
            indptr = np.zeros(self._n_vertices + 1, np.int64)
            csr = (indptr, np.empty(0, np.int64))
            self._csr_cache[radius] = csr
            return csr
        offsets = [g for g in self.group.ball(radius) if self.group._dist[g] >= 1]
        if self._coords is not None:
            off = np.array(offsets, np.int64)
            lo, grid = self._vertex_grid()
            cand = self._coords[:, None, :] + off[None, :, :]
            rel = cand - lo
            ok = np.all((rel >= 0) & (rel < np.array(grid.shape)), axis=2)
            nb = np.full(cand.shape[:2], -1, np.int64)
            nb[ok] = grid[tuple(rel[ok].T)]
            valid = nb >= 0
            indptr = np.zeros(self._n_vertices + 1, np.int64)
            indptr[1:] = np.cumsum(valid.sum(axis=1))
            indices = nb[valid].astype(np.int64)
        else:
            rows = []
            for g in self.elements:
                nb = [self.index[self.group.mul(g, o)] for o in offsets
                      if self.group.mul(g, o) in self.index]
                rows.append(np.array(sorted(nb), np.int64))
            indptr = np.zeros(self._n_vertices + 1, np.int64)
            indptr[1:] = np.cumsum([len(r) for r in rows])
            indices = (np.concatenate(rows) if rows else np.empty(0, np.int64))
        csr = (indptr, indices)
        self._csr_cache[radius] = csr
        return csr


class NetSpec:
    """epsilon-separated subset of a continuum space that rho-covers it."""

    def __init__(self, ambient, points, epsilon, rho):
        self.ambient = ambient
        self.points = (np.asarray(points) if ambient.is_graph
                       else np.asarray(points, float))
        self.epsilon = float(epsilon)
        self.rho = float(rho)

    def __len__(self):
        return len(self.points)


def epsilon_net(space, epsilon, rng):
    """Greedy separated net of the padded window.

    Acceptance distance is NET_ACCEPT_FACTOR * epsilon, so separation
    comfortably exceeds epsilon while the measured cover radius rho stays
    below 2 * epsilon.
    """
    if not epsilon > 0:
        raise PercolabError("epsilon must be positive")
    accept = NET_ACCEPT_FACTOR * epsilon
    if space.is_graph:
        ids = space.window_vertices(padded=True)
        chosen = []
        for vid in ids[rng.permutation(len(ids))]:
            if not chosen:
                chosen.append(int(vid))
                continue
            d = space.distance_ids(np.full(len(chosen), vid),
                                   np.array(chosen, np.int64)).min()
            if d >= accept:
                chosen.append(int(vid))
        pts = np.array(sorted(chosen), np.int64)
        rho = 0.0
        for vid in ids:
            d = space.distance_ids(np.full(len(pts), vid), pts).min()
            rho = max(rho, float(d))
        return NetSpec(space, pts, epsilon, rho)
    pts = greedy_separated_set(space, accept, accept, rng)
    probe = space.sample_window(rng, COVER_REPAIR_SAMPLES, padded=True)
    if space.kind == "euclidean":
        d2 = ((probe[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        rho = float(np.sqrt(d2.min(axis=1)).max())
    else:
        from .spaces import hyperbolic_cosh_dist
        cd = hyperbolic_cosh_dist(probe[:, 0:1], probe[:, 1:2],
                                  pts[None, :, 0], pts[None, :, 1])
        rho = float(np.arccosh(np.maximum(cd.min(axis=1), 1.0)).max())
    return NetSpec(space, pts, epsilon, rho)


class NetGraph(_GraphSpaceBase):
    """Graph on a net: vertices are net points, edges join points at ambient
    distance <= 2 rho; graph metric is hop count, measure is counting."""

    kind = "net"

    def __init__(self, net):
        self.net = net
        self.points = net.points
        self._n_vertices = len(net.points)
        eu, ev = net.ambient.edges_within(net.points, 2.0 * net.rho)
        indptr = np.zeros(self._n_vertices + 1, np.int64)
        deg = np.zeros(self._n_vertices, np.int64)
        np.add.at(deg, eu, 1)
        np.add.at(deg, ev, 1)
        indptr[1:] = np.cumsum(deg)
        indices = np.empty(int(deg.sum()), np.int64)
        cursor = indptr[:-1].copy()
        for a, b in zip(eu, ev):
            indices[cursor[a]] = b
            cursor[a] += 1
            indices[cursor[b]] = a
            cursor[b] += 1
        self._adj = (indptr, indices)
        self._csr_cache = {1: self._adj}
        center = int(np.argmin(net.ambient.center_distances(net.points)))
        self._center = center
        self._norms = self._bfs(center).astype(float)
        finite = self._norms[np.isfinite(self._norms)]
        radius = float(finite.max()) if len(finite) else 1.0
        self.window = WindowSpec(max(radius, 1.0), 0.0)
        self._bfs_cache = {}

    def center_vertex(self):
        return self._center

    def _bfs(self, source):
        indptr, indices = self._adj
        dist = np.full(self._n_vertices, np.inf)
        dist[source] = 0
        frontier = [source]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in indices[indptr[u]:indptr[u + 1]]:
                    if dist[v] == np.inf:
                        dist[v] = d
                        nxt.append(int(v))
            frontier = nxt
        return dist

    def _bfs_cached(self, source):
        if source not in self._bfs_cache:
            self._bfs_cache[source] = self._bfs(source)
        return self._bfs_cache[source]

    def distance(self, p, q):
        return float(self._bfs_cached(int(p))[int(q)])

    def distance_ids(self, u_ids, v_ids):
        u_ids = np.atleast_1d(u_ids).astype(np.int64)
        v_ids = np.atleast_1d(v_ids).astype(np.int64)
        return np.array([self._bfs_cached(int(u))[int(v)]
                         for u, v in zip(u_ids, v_ids)])

    def measure_ball(self, center, r):
        if r < 0:
            raise PercolabError("ball radius must be non-negative")
        src = self._center if center is None else int(center)
        return float(np.count_nonzero(self._bfs_cached(src) <= np.floor(r)))

    def max_degree(self):
        indptr, _ = self._adj
        return int(np.diff(indptr).max()) if self._n_vertices else 0

    def neighborhood_csr(self, radius):
        radius = int(radius)
        if radius in self._csr_cache:
            return self._csr_cache[radius]
        rows = []
        for v in range(self._n_vertices):
            d = self._bfs_cached(v)
            rows.append(np.flatnonzero((d >= 1) & (d <= radius)).astype(np.int64))
        indptr = np.zeros(self._n_vertices + 1, np.int64)
        indptr[1:] = np.cumsum([len(r) for r in rows])
        indices = (np.concatenate(rows) if rows else np.empty(0, np.int64))
        csr = (indptr, indices)
        self._csr_cache[radius] = csr
        return csr

    def with_window(self, radius=None, padding=None):
        return self


def net_graph(net):
    """Discretization graph of a net (edges within twice the cover radius)."""
    return NetGraph(net)


class GrowthEstimate:
    """Ball sizes and the fitted polynomial growth degree."""

    def __init__(self, ball_sizes, fitted_degree):
        self.ball_sizes = ball_sizes
        self.fitted_degree = float(fitted_degree)


def growth_degree(group, n_max):
    """Least-squares slope of log |B(n)| vs log n over n in [n_max/2, n_max].

    The small-n layers are excluded because they are dominated by
    generating-set transients rather than the asymptotic degree.
    """
    if n_max < 4:
        raise PercolabError("n_max must be at least 4")
    sizes = [(n, group.ball_size(n)) for n in range(1, n_max + 1)]
    lo = int(np.ceil(n_max / 2))
    ns = np.array([n for n, _ in sizes if n >= lo], float)
    ss = np.array([s for n, s in sizes if n >= lo], float)
    slope = np.polyfit(np.log(ns), np.log(ss), 1)[0]
    return GrowthEstimate(sizes, slope)
