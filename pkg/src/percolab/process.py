"""Poisson and Bernoulli point processes on cell partitions.

Couplings are realized through shared randomness: monotone pairs and the
homogenization sandwich draw one configuration at the top intensity and keep
points with per-point uniforms, so the stated inclusions hold pointwise on
every trial, not just in distribution.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import PercolabError
from .rng import TAG_COUNTS, TAG_POINTS, TAG_THIN, stream


@dataclass(frozen=True)
class IntensitySpec:
    """Homogeneous intensity lam, or a bounded intensity function squeezed
    between lam1 and lam2 (0 < lam1 <= Lambda <= lam2)."""
    kind: str
    lam: float = 0.0
    Lambda: Optional[Callable] = field(default=None, compare=False)
    lam1: float = 0.0
    lam2: float = 0.0


def homogeneous(lam):
    if lam < 0:
        raise PercolabError("intensity must be non-negative")
    return IntensitySpec("homogeneous", lam=float(lam))


def bounded(Lambda, lam1, lam2):
    if not (0 < lam1 <= lam2):
        raise PercolabError("bounded intensity requires 0 < lam1 <= lam2")
    return IntensitySpec("bounded", Lambda=Lambda, lam1=float(lam1),
                         lam2=float(lam2))


@dataclass
class PointConfiguration:
    """A realization: native point array, cell assignments, and provenance."""
    space: object
    points: np.ndarray
    cell_index: np.ndarray
    seed: int
    intensity: IntensitySpec

    @property
    def n(self):
        return len(self.points)

    def subset(self, mask):
        return PointConfiguration(self.space, self.points[mask],
                                  self.cell_index[mask], self.seed,
                                  self.intensity)

    def cell_counts(self, n_cells):
        lab = self.cell_index[self.cell_index >= 0]
        return np.bincount(lab, minlength=n_cells)


def _empty_points(space):
    if space.is_graph:
        return np.empty(0, np.int64)
    return np.empty((0, 2), float)


def sample_poisson(space, partition, intensity, measure_field="prime",
                   seed=0):
    """Poisson point process built cell by cell: counts are Poisson with mean
    intensity * cell measure, positions are uniform in the cell.

    Bounded intensities are realized by acceptance-rejection from the
    lam2-homogeneous process with retention Lambda(x)/lam2.
    """
    if intensity.kind == "bounded":
        base = sample_poisson(space, partition, homogeneous(intensity.lam2),
                              measure_field, seed)
        vals = np.asarray(intensity.Lambda(base.points), float)
        if base.n and (vals.min() < intensity.lam1 - 1e-12
                       or vals.max() > intensity.lam2 + 1e-12):
            raise PercolabError("Lambda leaves the [lam1, lam2] band")
        u = stream(seed, TAG_THIN, 1).random(base.n)
        cfg = base.subset(u < vals / intensity.lam2)
        return PointConfiguration(space, cfg.points, cfg.cell_index, seed,
                                  intensity)

    lam = intensity.lam
    if measure_field == "prime":
        measures = partition.measure_prime
    elif measure_field == "star":
        measures = partition.measure_star
        if not np.any(measures > 0):
            raise PercolabError("measure not induced")
    else:
        raise PercolabError(f"unknown measure field {measure_field!r}")

    counts = stream(seed, TAG_COUNTS).poisson(lam * measures)
    rng_pts = stream(seed, TAG_POINTS)
    if partition.trivial:
        n = int(counts[0]) if len(counts) else 0
        pts = (space.sample_window(rng_pts, n, padded=True) if n
               else _empty_points(space))
        cell = np.zeros(n, np.int64)
        return PointConfiguration(space, pts, cell, seed, intensity)

    chunks = []
    cells = []
    for i, c in enumerate(counts):
        if c == 0:
            continue
        chunks.append(partition.sample_in_cell(i, rng_pts, int(c)))
        cells.append(np.full(int(c), i, np.int64))
    pts = np.concatenate(chunks) if chunks else _empty_points(space)
    cell = np.concatenate(cells) if cells else np.empty(0, np.int64)
    return PointConfiguration(space, pts, cell, seed, intensity)


def sample_bernoulli(space, retention, seed=0):
    """Independent vertex inclusion on a graph space."""
    if not space.is_graph:
        raise PercolabError("Bernoulli process requires a graph space")
    ids = space.window_vertices(padded=True)
    p = retention(ids) if callable(retention) else np.full(len(ids),
                                                           float(retention))
    p = np.asarray(p, float)
    if p.min() < 0 or p.max() > 1:
        raise PercolabError("retention probabilities must lie in [0, 1]")
    u = stream(seed, TAG_POINTS).random(len(ids))
    keep = ids[u < p]
    return PointConfiguration(space, keep, np.full(len(keep), -1, np.int64),
                              seed, homogeneous(0.0))


def bernoulli_retention(lam, atom_mass):
    """Poisson -> Bernoulli conversion: 1 - exp(-lam * mass)."""
    if lam < 0 or atom_mass < 0:
        raise PercolabError("lam and atom_mass must be non-negative")
    return float(-np.expm1(-lam * atom_mass))


def _retention_values(retention, points):
    p = retention(points) if callable(retention) else np.full(
        len(points), float(retention))
    p = np.asarray(p, float)
    if len(p) and (p.min() < 0 or p.max() > 1):
        raise PercolabError("retention probabilities must lie in [0, 1]")
    return p


def thin(config, retention, seed=0):
    """Independent p-thinning; thinning Poisson(nu) at constant p gives
    Poisson(p nu)."""
    p = _retention_values(retention, config.points)
    u = stream(seed, TAG_THIN).random(config.n)
    return config.subset(u < p)


def couple_monotone(space, partition, lam_low, lam_high, seed=0):
    """(chi_low, chi_high) with chi_low a pointwise subset of chi_high and
    exact Poisson marginals at each intensity."""
    if not (0 < lam_low <= lam_high):
        raise PercolabError("need 0 < lam_low <= lam_high")
    high = sample_poisson(space, partition, homogeneous(lam_high),
                          seed=seed)
    u = stream(seed, TAG_THIN, 2).random(high.n)
    low = high.subset(u < lam_low / lam_high)
    return low, high


def sandwich_bounded(space, partition, intensity, seed=0):
    """Coupled (chi_lam1, chi_Lambda, chi_lam2) via two thinnings of one
    Poisson(lam2 mu) draw; inclusions hold pointwise."""
    if intensity.kind != "bounded":
        raise PercolabError("sandwich requires a bounded intensity")
    top = sample_poisson(space, partition, homogeneous(intensity.lam2),
                         seed=seed)
    vals = np.asarray(intensity.Lambda(top.points), float) if top.n else \
        np.empty(0)
    if top.n and (vals.min() < intensity.lam1 - 1e-12
                  or vals.max() > intensity.lam2 + 1e-12):
        raise PercolabError("Lambda leaves the [lam1, lam2] band")
    u = stream(seed, TAG_THIN, 3).random(top.n)
    mid = top.subset(u < vals / intensity.lam2)
    low = top.subset(u < intensity.lam1 / intensity.lam2)
    return low, mid, top
