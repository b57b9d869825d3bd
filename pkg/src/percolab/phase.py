"""Monte Carlo percolation probability, lambda_c bisection, phase verdicts,
and the end-to-end invariance experiment.

Sweeps use common random numbers: one realization at the top intensity per
trial, thinned to each grid intensity with shared per-point uniforms, so
estimated crossing probabilities are exactly nondecreasing in lambda.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels, qi
from .boolean import BooleanModel, crossing_from_labels
from .errors import PercolabError, PreconditionError
from .hypgrid import HypBucketGrid, lazy_crossing
from .process import homogeneous, sample_poisson
from .rng import (TAG_CHECK, TAG_MEASURE, TAG_PARTITION, TAG_THIN, TAG_TRIAL,
                  stream)
from .spaces import CellPartition

Z95 = 1.959963984540054
CSV_HEADER = "lambda,R,L,trials,crossings,p_hat,ci_low,ci_high,seed"
# above this expected point count, hyperbolic trials switch from the
# materialized O(n^2) pipeline to the lazy bucket component search
HYP_BRUTE_MAX = 20000
SWEEP_POINT_CAP = 2_000_000

SUBCRITICAL = "Subcritical"
SUPERCRITICAL = "Supercritical"
UNDETERMINED = "Undetermined"


def wilson_interval(k, n, z=Z95):
    if n == 0:
        return 0.0, 1.0
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    mid = (p + z2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return lo, hi


@dataclass
class CurveRow:
    lam: float
    R: float
    L: float
    trials: int
    crossings: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int

    @classmethod
    def from_counts(cls, lam, R, L, trials, crossings, seed):
        lo, hi = wilson_interval(crossings, trials)
        return cls(lam, R, L, trials, crossings,
                   crossings / trials if trials else 0.0, lo, hi, seed)

    def csv_line(self):
        return (f"{self.lam:.10g},{self.R:.10g},{self.L:.10g},{self.trials},"
                f"{self.crossings},{self.p_hat:.10g},{self.ci_low:.10g},"
                f"{self.ci_high:.10g},{self.seed}")


@dataclass
class PhaseCurve:
    rows: list
    seed: int

    def to_csv(self, comment=None):
        lines = []
        if comment:
            lines.append(f"# {comment}")
        lines.append(CSV_HEADER)
        lines.extend(r.csv_line() for r in self.rows)
        return "\n".join(lines) + "\n"


def _slices_concat(starts, lens):
    lens = lens.astype(np.int64)
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, np.int64)
    nz = lens > 0
    starts = starts[nz]
    lens = lens[nz]
    out = np.ones(total, np.int64)
    out[0] = starts[0]
    cum = np.cumsum(lens)[:-1]
    out[cum] = starts[1:] - (starts[:-1] + lens[:-1]) + 1
    return np.cumsum(out)


def _graph_occupied_crossing(space, occ, R, core_fraction):
    """Vertex-level union-find over occupied vertices (same components as the
    point-level intersection graph)."""
    if len(occ) == 0:
        return False
    nv = space.vertex_count(padded=True)
    indptr, indices = space.neighborhood_csr(int(np.floor(2.0 * R)))
    mask = np.zeros(nv, bool)
    mask[occ] = True
    deg = indptr[occ + 1] - indptr[occ]
    u_rep = np.repeat(occ, deg)
    v = indices[_slices_concat(indptr[occ], deg)]
    keep = mask[v] & (v > u_rep)
    loc = np.full(nv, -1, np.int64)
    loc[occ] = np.arange(len(occ))
    labels = kernels.union_labels(len(occ), loc[u_rep[keep]], loc[v[keep]])
    return crossing_from_labels(space, occ, labels, R, core_fraction)


def _materialized_crossing(space, pts, R, core_fraction):
    eu, ev = space.edges_within(pts, 2.0 * R)
    labels = kernels.union_labels(len(pts), eu, ev)
    return crossing_from_labels(space, pts, labels, R, core_fraction)


def crossing_trial(space, lam, R, seed, trial, core_fraction=0.25, grid=None):
    """One independent Poisson trial -> crossing verdict."""
    if space.is_graph:
        rng = stream(seed, TAG_TRIAL, trial)
        counts = rng.poisson(lam, space.vertex_count(padded=True))
        occ = np.flatnonzero(counts > 0).astype(np.int64)
        return _graph_occupied_crossing(space, occ, R, core_fraction)
    if space.kind == "hyperbolic":
        mu = space.window_measure(padded=True)
        if lam * mu > HYP_BRUTE_MAX:
            return lazy_crossing(space, lam, R, seed, trial, core_fraction,
                                 grid)
    rng = stream(seed, TAG_TRIAL, trial)
    n = int(rng.poisson(lam * space.window_measure(padded=True)))
    pts = space.sample_window(rng, n, padded=True)
    return _materialized_crossing(space, pts, R, core_fraction)


def _check_padding(space, R):
    if space.kind != "net" and space.window.padding + 1e-12 < R:
        raise PreconditionError(
            f"window padding {space.window.padding} must be >= R = {R}")


def _count_range(args):
    space, lam, R, seed, t0, t1, core_fraction = args
    grid = None
    if (space is not None and space.kind == "hyperbolic"
            and lam * space.window_measure(padded=True) > HYP_BRUTE_MAX):
        grid = HypBucketGrid(space.window.outer, 2.0 * R)
    return sum(crossing_trial(space, lam, R, seed, t, core_fraction, grid)
               for t in range(t0, t1))


def percolation_probability(space, lam, R, trials, seed, threads=1,
                            core_fraction=0.25, trial_fn=None):
    """Estimated crossing probability with a Wilson 95% interval."""
    if trials < 1:
        raise PercolabError("trials must be at least 1")
    L = space.window.radius if space is not None else 0.0
    if trial_fn is not None:
        crossings = sum(
            bool(trial_fn(lam, R, L, stream(seed, TAG_TRIAL, t)))
            for t in range(trials))
        return CurveRow.from_counts(lam, R, L, trials, crossings, seed)
    _check_padding(space, R)
    if threads <= 1:
        crossings = _count_range((space, lam, R, seed, 0, trials,
                                  core_fraction))
    else:
        chunk = max(1, trials // (threads * 4))
        jobs = [(space, lam, R, seed, t0, min(trials, t0 + chunk),
                 core_fraction) for t0 in range(0, trials, chunk)]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            crossings = sum(ex.map(_count_range, jobs))
    return CurveRow.from_counts(lam, R, L, trials, crossings, seed)


def _trial_points(space, lam, seed, trial):
    """Materialized realization for coupled sweeps (points for continuum,
    per-point vertex ids for graphs)."""
    rng = stream(seed, TAG_TRIAL, trial)
    if space.is_graph:
        counts = rng.poisson(lam, space.vertex_count(padded=True))
        return np.repeat(np.arange(len(counts), dtype=np.int64), counts)
    n = int(rng.poisson(lam * space.window_measure(padded=True)))
    return space.sample_window(rng, n, padded=True)


def sweep(space, lambdas, R, trials, seed, core_fraction=0.25):
    """Coupled sweep: nested thinnings of one top-intensity realization per
    trial make p_hat exactly nondecreasing in lambda."""
    _check_padding(space, R)
    lambdas = sorted(float(x) for x in lambdas)
    top = lambdas[-1]
    if top <= 0:
        raise PercolabError("sweep needs a positive top intensity")
    if not space.is_graph:
        expected = top * space.window_measure(padded=True)
        if expected > SWEEP_POINT_CAP:
            raise PercolabError(
                "coupled sweep would materialize too many points; "
                "use percolation_probability per lambda instead")
    crossings = np.zeros(len(lambdas), np.int64)
    for t in range(trials):
        pts = _trial_points(space, top, seed, t)
        u = stream(seed, TAG_THIN, t).random(len(pts))
        if space.is_graph:
            for j, lam in enumerate(lambdas):
                occ = np.unique(pts[u < lam / top])
                crossings[j] += _graph_occupied_crossing(
                    space, occ, R, core_fraction)
        else:
            eu, ev = space.edges_within(pts, 2.0 * R)
            for j, lam in enumerate(lambdas):
                keep = u < lam / top
                if not keep.any():
                    continue
                kept_edges = keep[eu] & keep[ev]
                labels = kernels.union_labels(len(pts), eu[kept_edges],
                                              ev[kept_edges])
                sub = np.flatnonzero(keep)
                crossings[j] += crossing_from_labels(
                    space, pts[sub], labels[sub], R, core_fraction)
    L = space.window.radius
    rows = [CurveRow.from_counts(lam, R, L, trials, int(c), seed)
            for lam, c in zip(lambdas, crossings)]
    return PhaseCurve(rows, seed)


@dataclass
class LambdaCResult:
    lambda_c_hat: float
    bracket: tuple
    rows: list
    iterations: int
    stop_reason: str

    def to_dict(self):
        return {
            "lambda_c_hat": self.lambda_c_hat,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "rows": [r.__dict__ for r in self.rows],
        }


def estimate_lambda_c(space, R, bracket, trials=400, seed=0, tol=None,
                      max_iter=14, threads=1, trial_fn=None):
    """Bisection on lambda to the p_hat = 0.5 crossing.

    Stops when the bracket is narrower than ``tol`` (default 1% of the
    initial width) or the midpoint's confidence interval straddles 0.5.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise PercolabError("bracket must be increasing")
    tol = tol if tol is not None else 0.01 * (hi - lo)

    def row(lam):
        return percolation_probability(space, lam, R, trials, seed,
                                       threads=threads, trial_fn=trial_fn)

    rows = [row(lo), row(hi)]
    if not (rows[0].p_hat < 0.5 < rows[1].p_hat):
        raise PercolabError("bracket does not straddle threshold")
    iterations = 0
    stop = "max_iter"
    while iterations < max_iter:
        mid = 0.5 * (lo + hi)
        r = row(mid)
        rows.append(r)
        iterations += 1
        if r.p_hat < 0.5:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            stop = "bracket_width"
            break
        if r.ci_low < 0.5 < r.ci_high:
            stop = "ci_overlap"
            break
    return LambdaCResult(0.5 * (lo + hi), (lo, hi), rows, iterations, stop)


@dataclass
class PhaseVerdict:
    verdict: str
    evidence: dict = field(default_factory=dict)


def classify_phase(space, lam, R, L_small, L_large, trials=200, seed=0,
                   threads=1):
    """Two-window trend classification: deep-subcritical or
    deep-supercritical probabilities with a consistent direction of flow."""
    if not L_small < L_large:
        raise PercolabError("need L_small < L_large")
    rows = []
    for L in (L_small, L_large):
        sp = space.with_window(radius=float(L), padding=float(R))
        rows.append(percolation_probability(sp, lam, R, trials, seed,
                                            threads=threads))
    p_s, p_l = rows[0].p_hat, rows[1].p_hat
    if p_l < 0.05 and p_l <= p_s:
        verdict = SUBCRITICAL
    elif p_l > 0.95 and p_l >= p_s:
        verdict = SUPERCRITICAL
    else:
        verdict = UNDETERMINED
    return PhaseVerdict(verdict, {"p_small": p_s, "p_large": p_l,
                                  "rows": rows})


def _verdict_dict(v):
    return {"verdict": v.verdict,
            "p_small": v.evidence["p_small"],
            "p_large": v.evidence["p_large"],
            "rows": [r.__dict__ for r in v.evidence["rows"]]}


def invariance_experiment(F, lam, R, seed=0, trials=200,
                          domain_windows=(16.0, 32.0),
                          codomain_windows=None, direction=None,
                          measure_samples=10000, mc_samples=200000,
                          threads=1, gamma_factor=1.0):
    """Transport a phase verdict through a mm-quasi-isometry.

    Classifies the domain, builds the induced partition and measure table,
    checks measure compatibility, transports one coupled configuration, and
    classifies the codomain at the homogenized intensity bracket
    (lam * Cbar1, lam * Cbar2) and the transported radius. The theorem-side
    verdict is read at the bracket end the direction calls for: the lower
    end for the subcritical leg, the upper end for the supercritical leg.
    """
    if F.verified.state == "Unchecked":
        qi.qi_check(F, rng=stream(seed, TAG_CHECK))
    if not F.verified:
        raise PreconditionError(f"map failed qi_check: {F.verified.detail}")

    dom_verdict = classify_phase(F.domain, lam, R, *domain_windows,
                                 trials=trials, seed=seed, threads=threads)

    if direction is None:
        p_l = dom_verdict.evidence["p_large"]
        direction = (qi.FORWARD_SUPERCRITICAL if p_l >= 0.5
                     else qi.FORWARD_SUBCRITICAL)
    if direction == qi.FORWARD_SUBCRITICAL:
        bound = F.alpha * F.beta + 2.0 * F.alpha * gamma_factor * F.gamma_qi
        if not R > bound:
            raise PreconditionError(
                f"subcritical transport needs R > alpha*beta + 2*alpha*gamma"
                f" = {bound:.6g}")

    part = qi.induce_partition(F, F.codomain, F.gamma_qi,
                               stream(seed, TAG_PARTITION),
                               measure_samples=measure_samples)
    table = qi.induce_measure_table(F, part, stream(seed, TAG_MEASURE),
                                    mc_samples=mc_samples)
    mm = qi.mm_check(table)
    if not mm.ok:
        raise PreconditionError(f"map is not measure compatible: {mm.reason}")
    lam_lo = lam * mm.Cbar1
    lam_hi = lam * mm.Cbar2

    dom_cfg = sample_poisson(F.domain, CellPartition.trivial_for(F.domain),
                             homogeneous(lam), seed=seed)
    dom_cfg.cell_index = part.assign(np.asarray(F(dom_cfg.points)))
    model = BooleanModel(F.domain, dom_cfg, R)
    transported = qi.transport_model(F, table, model, direction, seed,
                                     gamma_factor)
    counts_equal = bool(np.array_equal(
        dom_cfg.cell_counts(len(part)),
        transported.config.cell_counts(len(part))))

    cod_windows = codomain_windows if codomain_windows is not None \
        else domain_windows
    R_N = transported.radius
    cod_lo = classify_phase(F.codomain, lam_lo, R_N, *cod_windows,
                            trials=trials, seed=seed, threads=threads)
    cod_hi = classify_phase(F.codomain, lam_hi, R_N, *cod_windows,
                            trials=trials, seed=seed, threads=threads)
    theorem_side = (cod_lo if direction == qi.FORWARD_SUBCRITICAL
                    else cod_hi)

    opposite = {SUBCRITICAL: SUPERCRITICAL, SUPERCRITICAL: SUBCRITICAL}
    if theorem_side.verdict == dom_verdict.verdict != UNDETERMINED:
        agreement = "agree"
    elif theorem_side.verdict == opposite.get(dom_verdict.verdict):
        agreement = "opposite"
    else:
        agreement = "undetermined"

    return {
        "map": {"name": F.name, "alpha": F.alpha, "beta": F.beta,
                "gamma": F.gamma_qi},
        "lambda": lam,
        "R": R,
        "seed": seed,
        "direction": direction,
        "domain": _verdict_dict(dom_verdict),
        "transport": {
            "R_transported": R_N,
            "mm": {"C1": mm.C1, "C2": mm.C2, "C3": mm.C3, "C4": mm.C4,
                   "Cbar1": mm.Cbar1, "Cbar2": mm.Cbar2},
            "lambda_bracket": [lam_lo, lam_hi],
            "image_coverage": table.image_coverage,
            "coupled_counts_equal": counts_equal,
            "n_cells": len(part),
        },
        "codomain_low": _verdict_dict(cod_lo),
        "codomain_high": _verdict_dict(cod_hi),
        "agreement": agreement,
        "mu_star_csv": table.to_csv(),
    }

