"""The occupied region as an intersection graph of fixed-radius balls.

Two closed balls of radius R overlap iff their centers are within 2R, on
geodesic continuum spaces and graph metrics alike; the tie d = 2R counts as
touching. Components come from union-find over the edge list; the finite
window stands in for the unbounded-component percolation event through a
core-to-shell crossing proxy.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import PercolabError

# skip the exact max-extent scan beyond this many points (it is quadratic)
MAX_EXTENT_POINTS = 20000


@dataclass
class BooleanModel:
    space: object
    config: object
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise PercolabError("ball radius must be positive")
        w = self.space.window
        if self.space.kind != "net" and self.radius > w.padding + 1e-12:
            raise PercolabError(
                f"radius {self.radius} exceeds window padding {w.padding}")


@dataclass
class ClusterReport:
    component_ids: np.ndarray
    sizes: list
    max_extent: float
    crossing: object = None

    def to_json(self, include_labels=False, points=None):
        doc = {
            "sizes": [int(s) for s in self.sizes],
            "max_extent": (None if np.isnan(self.max_extent)
                           else float(self.max_extent)),
            "crossing": self.crossing,
            "n_components": len(self.sizes),
        }
        if include_labels:
            doc["component_ids"] = [int(x) for x in self.component_ids]
        if points is not None:
            doc["points"] = np.asarray(points, float).tolist()
        return json.dumps(doc, sort_keys=True)


def intersection_graph(model):
    """Edge list (u, v), u < v, over point indices with d(centers) <= 2R."""
    return model.space.edges_within(model.config.points, 2.0 * model.radius)


def _component_sizes(labels):
    if len(labels) == 0:
        return []
    uniq, counts = np.unique(labels, return_counts=True)
    return counts.tolist()


def _max_extent(space, points, labels, radius):
    n = len(labels)
    if n == 0:
        return 0.0
    if n > MAX_EXTENT_POINTS:
        return float("nan")
    best = 0.0
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        if len(idx) < 2:
            continue
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                d = space.distance(points[idx[a]], points[idx[b]])
                if d > best:
                    best = d
    return best + 2.0 * radius


def clusters(model, edges=None, with_extent=True):
    """Connected components of the intersection graph via union-find."""
    if edges is None:
        edges = intersection_graph(model)
    eu, ev = edges
    n = model.config.n
    labels = kernels.union_labels(n, eu, ev)
    extent = (_max_extent(model.space, model.config.points, labels,
                          model.radius) if with_extent else float("nan"))
    return ClusterReport(labels, _component_sizes(labels), extent)


def crossing_from_labels(space, points, labels, radius, core_fraction=0.25):
    """True iff one component holds a center within core_fraction * L of the
    window center and a center at distance >= L - R."""
    if len(labels) == 0:
        return False
    L = space.window.radius
    rho = space.center_distances(points)
    core = core_fraction * L
    shell = L - radius
    uniq, inv = np.unique(labels, return_inverse=True)
    lo = np.full(len(uniq), np.inf)
    hi = np.full(len(uniq), -np.inf)
    np.minimum.at(lo, inv, rho)
    np.maximum.at(hi, inv, rho)
    return bool(np.any((lo <= core) & (hi >= shell)))


def crossing_proxy(model, report, core_fraction=0.25):
    """Finite-window percolation surrogate; stores the verdict on the report."""
    w = model.space.window
    if model.space.kind != "net" and w.padding + 1e-12 < model.radius:
        raise PercolabError("window padding must cover the ball radius")
    out = crossing_from_labels(model.space, model.config.points,
                               report.component_ids, model.radius,
                               core_fraction)
    report.crossing = out
    return out
