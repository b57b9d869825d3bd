import numpy as np
import pytest

import percolab as pl
from percolab.errors import DegenerateCellError, ForeignPointError
from percolab.rng import stream


def test_euclidean_distance_pythagoras(euclid10):
    assert pl.distance(euclid10, (0.0, 0.0), (3.0, 4.0)) == pytest.approx(5.0)


def test_hyperbolic_antipodal_distance(hyp5):
    # antipodal points on a geodesic through the origin: d = r1 + r2
    assert pl.distance(hyp5, (1.0, 0.0), (1.0, np.pi)) == pytest.approx(
        2.0, abs=1e-12)


def test_foreign_point_rejected(euclid10, hyp5):
    p = pl.Point("hyperbolic", (1.0, 0.0))
    with pytest.raises(ForeignPointError):
        pl.distance(euclid10, p, (0.0, 0.0))


def test_ball_measures(euclid10, hyp5, z2_space):
    assert pl.measure_ball(euclid10, None, 1.0) == pytest.approx(np.pi)
    assert pl.measure_ball(hyp5, None, 0.0) == pytest.approx(0.0)
    assert pl.measure_ball(z2_space, None, 1.0) == 5.0
    with pytest.raises(pl.PercolabError):
        pl.measure_ball(euclid10, None, -1.0)


def test_ball_measure_monotone(euclid10, hyp5, z2_space, rng):
    for sp in (euclid10, hyp5, z2_space):
        radii = np.sort(rng.random(10) * 4.0)
        vals = [pl.measure_ball(sp, None, r) for r in radii]
        assert np.all(np.diff(vals) >= 0)


def test_hyperbolic_small_ball_is_euclidean(hyp5):
    r = 1e-3
    ratio = pl.measure_ball(hyp5, None, r) / (np.pi * r * r)
    assert abs(ratio - 1.0) < 1e-4


@pytest.mark.parametrize("kind", ["euclidean", "hyperbolic"])
def test_metric_axioms_continuum(kind, rng):
    sp = (pl.EuclideanPlane(pl.WindowSpec(14.0, 0.0)) if kind == "euclidean"
          else pl.HyperbolicDisk(pl.WindowSpec(14.0, 0.0)))
    P = sp.sample_window(rng, 1000)
    Q = sp.sample_window(rng, 1000)
    S = sp.sample_window(rng, 1000)
    for i in range(0, 1000, 7):
        dpq = sp.distance(P[i], Q[i])
        assert dpq == pytest.approx(sp.distance(Q[i], P[i]), abs=1e-12)
        assert dpq <= sp.distance(P[i], S[i]) + sp.distance(S[i], Q[i]) + 1e-9
        assert sp.distance(P[i], P[i]) <= 1e-12


def test_metric_axioms_graph(z2_space, rng):
    ids = z2_space.sample_window(rng, 300)
    for i in range(0, 300, 5):
        p, q, s = ids[i], ids[(i + 1) % 300], ids[(i + 2) % 300]
        dpq = z2_space.distance(int(p), int(q))
        assert dpq == z2_space.distance(int(q), int(p))
        assert dpq <= (z2_space.distance(int(p), int(s))
                       + z2_space.distance(int(s), int(q)))
        assert z2_space.distance(int(p), int(p)) == 0


def test_window_spec_validation():
    with pytest.raises(pl.PercolabError):
        pl.WindowSpec(-1.0)
    with pytest.raises(pl.PercolabError):
        pl.WindowSpec(1.0, -0.5)


def test_sample_window_uniform_mean(euclid10, rng):
    pts = euclid10.sample_window(rng, 10000)
    # mean of a uniform disk is the center; sd of the mean is L/(2 sqrt(n))
    sigma = 10.0 / (2.0 * np.sqrt(10000))
    assert abs(pts[:, 0].mean()) < 3 * sigma
    assert abs(pts[:, 1].mean()) < 3 * sigma


def test_trivial_cell_sampler_matches_window(euclid10, rng):
    part = pl.CellPartition.trivial_for(euclid10)
    pts = pl.sample_uniform_in_cell(euclid10, part.cells[0], rng, 10000)
    sigma = 10.0 / (2.0 * np.sqrt(10000))
    assert abs(pts[:, 0].mean()) < 3 * sigma
    assert np.all(euclid10.contains(pts))


def test_hyperbolic_radial_cdf(rng):
    sp = pl.HyperbolicDisk(pl.WindowSpec(4.0, 0.0))
    part = pl.CellPartition.trivial_for(sp)
    pts = part.sample_in_cell(0, rng, 20000)
    L = 4.0
    cdf = lambda r: (np.cosh(r) - 1.0) / (np.cosh(L) - 1.0)
    for q in (0.25, 0.5, 0.75):
        r_q = np.quantile(pts[:, 0], q)
        assert abs(cdf(r_q) - q) < 0.02


def test_graph_singleton_cell_sampler(rng):
    sp = pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(3.0, 0.0))
    part = pl.build_window_partition(sp, 1.0, rng)
    cell = part.cells[7]
    draws = part.sample_in_cell(7, rng, 50)
    assert np.all(draws == cell.center)


def test_single_vertex_window_partition(rng):
    sp = pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(0.5, 0.0))
    part = pl.build_window_partition(sp, 1.0, rng)
    assert len(part) == 1
    assert part.cells[0].measure_prime == 1.0


def test_partition_set_difference_rule():
    # second cell is the ball difference: points in both balls go to cell 0
    sp = pl.EuclideanPlane(pl.WindowSpec(4.0, 0.0))
    centers = np.array([[0.0, 0.0], [0.5, 0.0]])
    part = pl.CellPartition(sp, 1.0, centers, [1.0, 1.0])
    lab = part.assign(np.array([[0.4, 0.0], [1.2, 0.0], [-3.0, 0.0]]))
    assert lab.tolist() == [0, 1, -1]


def test_partition_cover_and_disjoint(euclid10, rng):
    part = pl.build_window_partition(euclid10, 1.0, stream(77),
                                     measure_samples=3000)
    pts = euclid10.sample_window(rng, 10000)
    lab = part.assign(pts)
    assert np.all(lab >= 0)
    # the assigned cell's center ball really contains the point
    centers = np.asarray(part.centers)[lab]
    dists = np.hypot(pts[:, 0] - centers[:, 0], pts[:, 1] - centers[:, 1])
    assert np.all(dists < part.gamma)


def test_partition_mass_additivity():
    part = pl.build_window_partition(
        pl.EuclideanPlane(pl.WindowSpec(10.0, 0.0)), 1.0, stream(78),
        measure_samples=10000)
    total = part.measure_prime.sum()
    assert abs(total - np.pi * 100) / (np.pi * 100) < 0.01


def test_degenerate_cell_errors(euclid10):
    part = pl.CellPartition.trivial_for(euclid10)
    part.cells[0].measure_prime = 0.0
    with pytest.raises(DegenerateCellError):
        part.sample_in_cell(0, stream(1), 1)


def test_hyperbolic_partition_mass_additivity():
    sp = pl.HyperbolicDisk(pl.WindowSpec(3.0, 0.0))
    part = pl.build_window_partition(sp, 1.0, stream(81),
                                     measure_samples=4000)
    total = part.measure_prime.sum()
    window = sp.window_measure()
    assert abs(total - window) / window < 0.02
    pts = sp.sample_window(stream(82), 5000)
    assert np.all(part.assign(pts) >= 0)
