"""Quasi-isometries, induced partitions and measures, and coupled transport.

A map F with parameters (alpha, beta, gamma) satisfies
(1/alpha) d_M - beta <= d_N(F x, F y) <= alpha d_M + beta and has
gamma-dense image. Pulling a greedy codomain covering {K_i} back through F
gives preimage cells E_i = F^{-1}(K_i); the induced measure assigns
mu*(K_i) = mu(E_i) and the coupled transport reuses per-cell counts, so the
domain and transported configurations agree cell by cell on every trial.
"""

import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import PercolabError, PreconditionError
from .process import PointConfiguration
from .rng import TAG_CHECK, TAG_MEASURE, TAG_TRANSPORT, stream
from .spaces import build_window_partition, hyperbolic_cosh_dist

UNCHECKED = "Unchecked"
PASSED = "PassedOnSample"
VIOLATED = "Violated"


@dataclass
class QIStatus:
    state: str = UNCHECKED
    witness: object = None
    detail: str = ""

    def __bool__(self):
        return self.state == PASSED


@dataclass
class QuasiIsometryMap:
    forward: Callable
    alpha: float
    beta: float
    gamma_qi: float
    domain: object
    codomain: object
    name: str = "custom"
    verified: QIStatus = field(default_factory=QIStatus)
    gamma_tilde: Optional[float] = None

    def __post_init__(self):
        if self.alpha < 1 or self.beta < 0 or self.gamma_qi < 0:
            raise PercolabError("need alpha >= 1, beta >= 0, gamma >= 0")

    def __call__(self, P):
        return self.forward(P)


def pair_distances(space, P, Q):
    """Elementwise distances between two equal-length point arrays."""
    if space.is_graph:
        return space.distance_ids(P, Q)
    P = np.atleast_2d(np.asarray(P, float))
    Q = np.atleast_2d(np.asarray(Q, float))
    if space.kind == "euclidean":
        return np.hypot(P[:, 0] - Q[:, 0], P[:, 1] - Q[:, 1])
    cd = hyperbolic_cosh_dist(P[:, 0], P[:, 1], Q[:, 0], Q[:, 1])
    return np.arccosh(np.maximum(cd, 1.0))


def _valid_image_mask(space, P):
    if space.is_graph:
        return np.atleast_1d(P) >= 0
    return np.ones(np.atleast_2d(P).shape[0], bool)


def qi_check(F, sample_pairs=500, rng=None, tol=1e-9, codomain_core=0.5):
    """Verify both quasi-isometry axioms; on failure the status carries a
    witness.

    The distance axiom is tested exactly on sampled pairs. Quasi-surjectivity
    is tested on codomain points inside ``codomain_core`` times the window
    radius (the boundary annulus is unreachable once the domain is truncated)
    with slack alpha * rho + beta for the probe's measured cover radius rho,
    since a finite image sample can only resolve gaps down to its density.
    """
    rng = rng if rng is not None else stream(0, TAG_CHECK)
    dom, cod = F.domain, F.codomain
    X = dom.sample_window(rng, sample_pairs, padded=False)
    Y = dom.sample_window(rng, sample_pairs, padded=False)
    FX = F(X)
    FY = F(Y)
    ok = _valid_image_mask(cod, FX) & _valid_image_mask(cod, FY)
    dM = pair_distances(dom, X[ok], Y[ok])
    dN = pair_distances(cod, np.asarray(FX)[ok], np.asarray(FY)[ok])
    upper = dN - (F.alpha * dM + F.beta)
    lower = (dM / F.alpha - F.beta) - dN
    bad = np.flatnonzero((upper > tol) | (lower > tol))
    if len(bad):
        i = int(bad[0])
        F.verified = QIStatus(VIOLATED, witness=(X[ok][i], Y[ok][i]),
                              detail=f"d_M={dM[i]:.6g} d_N={dN[i]:.6g}")
        return F.verified

    probe = dom.sample_window(rng, max(2000, 4 * sample_pairs), padded=True)
    img = np.asarray(F(probe))
    img = img[_valid_image_mask(cod, img)]
    if dom.is_graph:
        rho_probe = 0.0  # the probe enumerates every window vertex
        probe = dom.window_vertices(padded=True)
        img = np.asarray(F(probe))
        img = img[_valid_image_mask(cod, img)]
    else:
        fresh = dom.sample_window(rng, 400, padded=False)
        gaps = [pair_distances(dom, np.broadcast_to(
            np.atleast_2d(fresh[i]), probe.shape), probe).min()
            for i in range(len(fresh))]
        rho_probe = float(np.max(gaps))
    slack = F.alpha * rho_probe + (F.beta if rho_probe > 0 else 0.0)

    Z = cod.sample_window(rng, sample_pairs, padded=False)
    core = cod.center_distances(Z) <= codomain_core * cod.window.radius
    Z = Z[core]
    for i in range(len(Z)):
        if cod.is_graph:
            dmin = cod.distance_ids(np.full(len(img), Z[i]), img).min()
        else:
            dmin = pair_distances(cod, np.broadcast_to(
                np.atleast_2d(Z[i]), img.shape), img).min()
        if dmin > F.gamma_qi + slack + tol:
            F.verified = QIStatus(VIOLATED, witness=(Z[i], None),
                                  detail=f"image gap {dmin:.6g} > gamma")
            return F.verified
    F.verified = QIStatus(PASSED)
    return F.verified


def quasi_inverse(F, rng=None, n_probe=4000, domain_sample=None):
    """Coarse inverse G: G(z) is the domain sample point whose image is
    nearest to z; gamma_tilde records max d_M(G(F(x)), x) over test points."""
    rng = rng if rng is not None else stream(1, TAG_CHECK)
    dom, cod = F.domain, F.codomain
    if domain_sample is not None:
        X = np.asarray(domain_sample)
    elif dom.is_graph:
        X = dom.window_vertices(padded=True)
    else:
        X = dom.sample_window(rng, n_probe, padded=True)
    test = (dom.window_vertices(padded=False) if dom.is_graph
            else dom.sample_window(rng, 400, padded=False))
    # evaluation points join the candidate pool (after the explicit sample,
    # so ties resolve to the caller's points) making exact preimages exact
    X = np.concatenate([X, test])
    if len(X) == 0:
        raise PercolabError("empty domain sample")
    FX = np.asarray(F(X))
    ok = _valid_image_mask(cod, FX)
    X = X[ok]
    FX = FX[ok]

    def backward(Z):
        Z = np.atleast_1d(Z) if cod.is_graph else np.atleast_2d(Z)
        out_idx = np.empty(len(Z), np.int64)
        for i in range(len(Z)):
            if cod.is_graph:
                d = cod.distance_ids(np.full(len(FX), Z[i]), FX)
            else:
                d = pair_distances(cod, np.broadcast_to(
                    np.atleast_2d(Z[i]), FX.shape), FX)
            out_idx[i] = int(np.argmin(d))
        return X[out_idx]

    G = QuasiIsometryMap(backward, F.alpha, F.beta, F.gamma_qi,
                         cod, dom, name=f"quasi_inverse({F.name})")
    FT = np.asarray(F(test))
    okt = _valid_image_mask(cod, FT)
    back = backward(FT[okt])
    G.gamma_tilde = float(pair_distances(dom, back, test[okt]).max()) \
        if okt.any() else 0.0
    return G


def radius_forward(R, alpha, beta):
    """R' = alpha R + beta, so F(B(p, R)) sits inside B(F(p), R')."""
    if not R > 0:
        raise PercolabError("R must be positive")
    return alpha * R + beta


def radius_backward(R, alpha, beta, k):
    """Midpoint of the feasible interval (k, min(2k, R/alpha - beta)); the
    result R' satisfies k < R' < 2k and R > alpha (R' + beta), so
    B(F(p), R') meets F(M) inside F(B(p, R))."""
    if not k > 0:
        raise PreconditionError("backward transport needs k > 0")
    if not R > alpha * beta + 2.0 * alpha * k:
        raise PreconditionError(
            f"radius too small for backward transport: need R > "
            f"alpha*beta + 2*alpha*k = {alpha * beta + 2 * alpha * k:.6g}")
    hi = min(2.0 * k, R / alpha - beta)
    return 0.5 * (k + hi)


def induce_partition(F, codomain_space, gamma, rng,
                     measure_samples=10000):
    """Greedy ball-difference covering of the codomain window at radius
    gamma (the quasi-surjectivity radius; graphs fall back to radius 1 when
    gamma = 0, where cells are single vertices)."""
    if not F.verified:
        raise PercolabError("map must pass qi_check before inducing")
    g_eff = gamma
    if g_eff <= 0:
        if not codomain_space.is_graph:
            raise PercolabError("continuum partitions need gamma > 0")
        g_eff = 1.0
    return build_window_partition(codomain_space, g_eff, rng,
                                  measure_samples=measure_samples)


@dataclass
class MMConstants:
    ok: bool
    C1: float = 0.0
    C2: float = 0.0
    C3: float = 0.0
    C4: float = 0.0
    Cbar1: float = 0.0
    Cbar2: float = 0.0
    reason: str = ""
    unresolved_cells: int = 0
    unresolved_mass: float = 0.0


@dataclass
class InducedMeasureTable:
    partition: object
    star_values: np.ndarray
    star_se: np.ndarray
    image_coverage: float
    mc_samples_used: int = 0
    exact: bool = False
    constants: Optional[MMConstants] = None

    def to_csv(self):
        buf = io.StringIO()
        buf.write("cell_index,center,measure_prime,measure_star\n")
        for cell, star in zip(self.partition.cells, self.star_values):
            c = cell.center
            ctext = (f"{c[0]:.10g};{c[1]:.10g}"
                     if not self.partition.space.is_graph else str(int(c)))
            buf.write(f"{cell.index},{ctext},{cell.measure_prime:.10g},"
                      f"{star:.10g}\n")
        return buf.getvalue()


def induce_measure_table(F, partition, rng=None, mc_samples=200000):
    """mu*(K_i) = domain measure of F^{-1}(K_i): exact vertex counts for
    graph domains, Monte Carlo volume for continuum domains (budget scales
    with the cell count so typical cells resolve well)."""
    rng = rng if rng is not None else stream(2, TAG_MEASURE)
    dom = F.domain
    m = len(partition)
    if dom.is_graph:
        ids = dom.window_vertices(padded=True)
        lab = partition.assign(np.asarray(F(ids)))
        good = lab >= 0
        star = np.bincount(lab[good], minlength=m).astype(float)
        se = np.zeros(m)
        coverage = float(good.mean()) if len(ids) else 1.0
        table = InducedMeasureTable(partition, star, se, coverage, exact=True)
    else:
        mc = max(int(mc_samples), 600 * m)
        total = dom.window_measure(padded=True)
        X = dom.sample_window(rng, mc, padded=True)
        lab = partition.assign(np.asarray(F(X)))
        good = lab >= 0
        counts = np.bincount(lab[good], minlength=m).astype(float)
        star = total * counts / mc
        p = counts / mc
        se = total * np.sqrt(np.maximum(p * (1 - p), 0.0) / mc)
        coverage = float(good.mean())
        table = InducedMeasureTable(partition, star, se, coverage,
                                    mc_samples_used=mc)
    for cell, s in zip(partition.cells, table.star_values):
        cell.measure_star = float(s)
    return table


# a zero star estimate only counts against measure compatibility when the
# cell was resolvable: expected hits under star ~ prime of at least this many
MM_RESOLUTION_HITS = 5
# sliver cells below the estimator resolution may carry at most this share
# of the total reference mass before compatibility is declared unresolved
MM_UNRESOLVED_MASS_CAP = 0.005


def mm_check(table):
    """Measure-compatibility constants C1..C4 over the window cells and the
    sandwich constants Cbar1 = C3/C2, Cbar2 = C4/C1.

    For Monte Carlo tables, cells whose reference mass sits below the
    estimator's resolution (fewer than MM_RESOLUTION_HITS expected hits) and
    whose star estimate is zero are excluded from the constants and reported
    as unresolved; their total mass must stay under MM_UNRESOLVED_MASS_CAP.
    """
    prime = table.partition.measure_prime
    star = table.star_values
    if len(prime) == 0:
        return MMConstants(False, reason="empty partition")
    keep = np.ones(len(prime), bool)
    unresolved_mass = 0.0
    if not table.exact and table.mc_samples_used > 0:
        density = table.mc_samples_used / \
            table.partition.space.window_measure(padded=True)
        floor = MM_RESOLUTION_HITS / density
        keep = ~((star == 0) & (prime <= floor))
        unresolved_mass = float(prime[~keep].sum())
        if unresolved_mass > MM_UNRESOLVED_MASS_CAP * prime.sum():
            table.constants = MMConstants(
                False, reason="unresolved cells carry too much mass",
                unresolved_cells=int((~keep).sum()),
                unresolved_mass=unresolved_mass)
            return table.constants
    C1, C2 = float(prime[keep].min()), float(prime[keep].max())
    C3, C4 = float(star[keep].min()), float(star[keep].max())
    out = MMConstants(True, C1, C2, C3, C4, 0.0, 0.0,
                      unresolved_cells=int((~keep).sum()),
                      unresolved_mass=unresolved_mass)
    if not (np.isfinite([C1, C2, C3, C4]).all() and C1 > 0 and C3 > 0):
        out.ok = False
        out.reason = "a bound is zero or unbounded"
        table.constants = out
        return out
    out.Cbar1 = C3 / C2
    out.Cbar2 = C4 / C1
    table.constants = out
    return out


@dataclass
class BallRegion:
    """Bounded test region: metric ball intersected with the window."""
    space: object
    center: object
    radius: float


def _region_samples(region, rng, n):
    space = region.space
    if space.is_graph:
        ids = space.window_vertices(padded=True)
        d = np.array([space.distance(int(region.center), int(v))
                      for v in ids])
        return ids[d <= region.radius]
    pts = space.sample_ball(np.asarray(region.center, float), region.radius,
                            rng, n)
    return pts[space.contains(pts, padded=True)]


def region_measure_prime(region, rng=None, n=4000):
    """Reference measure of the region (exact for graphs, ball measure times
    the in-window fraction for continuum)."""
    space = region.space
    if space.is_graph:
        return float(len(_region_samples(region, rng, n)))
    rng = rng if rng is not None else stream(3, TAG_MEASURE)
    pts = space.sample_ball(np.asarray(region.center, float), region.radius,
                            rng, n)
    frac = float(space.contains(pts, padded=True).mean())
    return space.measure_ball(None, region.radius) * frac


def induced_measure(region, table, rng=None, n=4000):
    """The weighted extension evaluated literally:
    mu*(D) = mu'(D) * sum over cells meeting D of mu*(K_i)/mu'(K_i)."""
    rng = rng if rng is not None else stream(4, TAG_MEASURE)
    part = table.partition
    pts = _region_samples(region, rng, n)
    if len(pts) == 0:
        raise PercolabError("region too thin for sampling")
    lab = part.assign(pts)
    lab = lab[lab >= 0]
    if len(lab) == 0:
        raise PercolabError("region too thin for sampling")
    cells = np.unique(lab)
    prime = part.measure_prime
    ratio = table.star_values[cells] / prime[cells]
    mu_prime_D = region_measure_prime(region, rng, n)
    return float(mu_prime_D * ratio.sum())


def induced_measure_additive(region, table, rng=None, n=4000):
    """Cell-resolved extension sum_i mu'(D n K_i) mu*(K_i)/mu'(K_i) (the
    sigma-additive measure the sandwich bounds apply to)."""
    rng = rng if rng is not None else stream(5, TAG_MEASURE)
    part = table.partition
    pts = _region_samples(region, rng, n)
    if len(pts) == 0:
        raise PercolabError("region too thin for sampling")
    lab = part.assign(pts)
    good = lab >= 0
    if not good.any():
        raise PercolabError("region too thin for sampling")
    mu_prime_D = region_measure_prime(region, rng, n)
    prime = part.measure_prime
    if part.space.is_graph:
        # counting measure: each sampled vertex is exactly one unit of mass
        counts = np.bincount(lab[good], minlength=len(part))
        return float((counts * table.star_values
                      / np.maximum(prime, 1e-300)).sum())
    frac = np.bincount(lab[good], minlength=len(part)) / len(pts)
    return float((mu_prime_D * frac * table.star_values
                  / np.maximum(prime, 1e-300)).sum())


def transport_configuration(F, table, domain_config, seed=0):
    """Coupled induced configuration: cell i of the codomain receives exactly
    the domain count of E_i, placed uniformly in K_i from the cell stream."""
    part = table.partition
    counts = domain_config.cell_counts(len(part))
    chunks = []
    cells = []
    for i, c in enumerate(counts):
        if c == 0:
            continue
        rng = stream(seed, TAG_TRANSPORT, i)
        chunks.append(part.sample_in_cell(i, rng, int(c)))
        cells.append(np.full(int(c), i, np.int64))
    space = part.space
    if chunks:
        pts = np.concatenate(chunks)
        cell = np.concatenate(cells)
    else:
        pts = (np.empty(0, np.int64) if space.is_graph
               else np.empty((0, 2)))
        cell = np.empty(0, np.int64)
    return PointConfiguration(space, pts, cell, seed,
                              domain_config.intensity)


FORWARD_SUPERCRITICAL = "supercritical"
FORWARD_SUBCRITICAL = "subcritical"


def transported_radius(R, alpha, beta, gamma, direction, gamma_factor=1.0):
    """Ball radius for the induced Poisson Boolean model.

    Supercritical: alpha R + beta grown by the pairing offset. Subcritical:
    the backward radius shrunk by it; when gamma = 0 the free parameter k is
    set inside the feasible interval at (R/alpha - beta)/4.

    ``gamma_factor`` scales the pairing offset: 1.0 pairs induced points at
    distance gamma from the images, 2.0 uses the provable cell-diameter
    bound instead."""
    off = gamma_factor * gamma
    if direction == FORWARD_SUPERCRITICAL:
        return radius_forward(R, alpha, beta) + off
    if direction != FORWARD_SUBCRITICAL:
        raise PercolabError(f"unknown direction {direction!r}")
    if not R > alpha * beta + 2.0 * alpha * off:
        raise PreconditionError(
            f"radius too small for backward transport: need R > "
            f"alpha*beta + 2*alpha*gamma = "
            f"{alpha * beta + 2.0 * alpha * off:.6g}")
    k = off if off > 0 else (R / alpha - beta) / 4.0
    return radius_backward(R, alpha, beta, k) - off


def transport_model(F, table, model, direction, seed=0, gamma_factor=1.0):
    """Transport a Boolean model through F: coupled configuration plus the
    direction's radius transform."""
    from .boolean import BooleanModel
    R_N = transported_radius(model.radius, F.alpha, F.beta, F.gamma_qi,
                             direction, gamma_factor)
    cfg = transport_configuration(F, table, model.config, seed)
    space = table.partition.space
    if space.kind != "net" and R_N > space.window.padding + 1e-12:
        raise PreconditionError(
            f"codomain window padding {space.window.padding} cannot hold "
            f"transported radius {R_N:.6g}")
    return BooleanModel(space, cfg, R_N)


# ---------------------------------------------------------------------------
# shipped quasi-isometry instances

def identity_map(space):
    return QuasiIsometryMap(lambda P: P, 1.0, 0.0, 0.0, space, space,
                            name="identity")


def _zd_lookup(space):
    lo, grid = space._vertex_grid()
    shape = np.array(grid.shape)

    def lookup(coords):
        rel = coords - lo
        ok = np.all((rel >= 0) & (rel < shape), axis=1)
        out = np.full(len(coords), -1, np.int64)
        out[ok] = grid[tuple(rel[ok].T)]
        return out
    return lookup


def z2_generator_change(domain, codomain, alpha=2.0):
    """Identity on vertices between two Cayley graphs of Z^2 with different
    generating sets (standard <-> king): (alpha, 0, 0)."""
    lookup = _zd_lookup(codomain)

    def fwd(ids):
        return lookup(domain._coords[np.atleast_1d(ids).astype(np.int64)])
    return QuasiIsometryMap(fwd, alpha, 0.0, 0.0, domain, codomain,
                            name="z2_generator_change")


def rounding_map(euclid_space, z2_space):
    """Nearest lattice point R^2 -> Z^2: parameters (2, 2, 1)."""
    lookup = _zd_lookup(z2_space)

    def fwd(P):
        P = np.atleast_2d(np.asarray(P, float))
        return lookup(np.rint(P).astype(np.int64))
    return QuasiIsometryMap(fwd, 2.0, 2.0, 1.0, euclid_space, z2_space,
                            name="rounding_r2_to_z2")


def net_discretization_map(space, graph):
    """Nearest net point M -> NetGraph; parameters derived from the cover
    radius rho: each hop moves at most 2 rho, and a geodesic can be shadowed
    by net points every rho."""
    net = graph.net
    pts = net.points
    rho = max(net.rho, 1e-9)

    if space.kind == "euclidean":
        from scipy.spatial import cKDTree
        tree = cKDTree(pts)

        def fwd(P):
            return tree.query(np.atleast_2d(np.asarray(P, float)))[1].astype(
                np.int64)
    else:
        def fwd(P):
            P = np.atleast_2d(np.asarray(P, float))
            out = np.empty(len(P), np.int64)
            for i in range(len(P)):
                cd = hyperbolic_cosh_dist(P[i, 0], P[i, 1], pts[:, 0],
                                          pts[:, 1])
                out[i] = int(np.argmin(cd))
            return out

    alpha = max(2.0 * rho, 1.0 / rho, 1.0)
    return QuasiIsometryMap(fwd, alpha, 1.0, rho, space, graph,
                            name="net_discretization")
