import numpy as np
import pytest

import percolab as pl
from percolab.groups import NetSpec
from percolab.rng import stream


def test_word_distance_z2_standard():
    g = pl.z2_standard()
    assert pl.word_distance(g, (0, 0), (2, 3)) == 5
    assert pl.word_distance(g, (1, 1), (1, 1)) == 0


def test_word_distance_king_equals_chebyshev(rng):
    g = pl.z2_king()
    assert pl.word_distance(g, (0, 0), (2, 3)) == 3
    for _ in range(50):
        a = rng.integers(-5, 6, 2)
        b = rng.integers(-5, 6, 2)
        cheb = int(np.max(np.abs(a - b)))
        assert pl.word_distance(g, tuple(a), tuple(b)) == cheb


def test_free_group_reduced_words():
    f = pl.free_group(2)
    # a b a^-1 has reduced length 3
    assert pl.word_distance(f, (), (1, 2, -1)) == 3
    assert f.mul((1, 2), (-2, -1)) == ()


def test_heisenberg_group_law():
    h = pl.heisenberg()
    x, y = (1, 0, 0), (0, 1, 0)
    # commutator [x, y] is the central element
    comm = h.mul(h.mul(x, y), h.mul(h.inv(x), h.inv(y)))
    assert comm == (0, 0, 1)
    for g in (x, y, (2, -1, 3)):
        assert h.mul(g, h.inv(g)) == (0, 0, 0)


def test_cayley_ball_counts():
    assert len(pl.cayley_ball(pl.z2_standard(), 2)) == 13
    assert len(pl.cayley_ball(pl.free_group(2), 2)) == 17
    assert len(pl.cayley_ball(pl.heisenberg(), 1)) == 5


def test_cayley_balls_nest():
    g = pl.z2_standard()
    for n in range(4):
        assert set(pl.cayley_ball(g, n)) <= set(pl.cayley_ball(g, n + 1))


def test_word_metric_left_invariant(rng):
    g = pl.z2_king()
    for _ in range(100):
        a, u, v = (tuple(rng.integers(-4, 5, 2)) for _ in range(3))
        assert pl.word_distance(g, u, v) == pl.word_distance(
            g, g.mul(a, u), g.mul(a, v))


def test_generating_set_comparison_on_ball():
    # the concrete quasi-isometry bound between the two generating sets
    std, king = pl.z2_standard(), pl.z2_king()
    ball = pl.cayley_ball(std, 8)
    for i in range(0, len(ball), 7):
        for j in range(i + 1, len(ball), 11):
            d_std = pl.word_distance(std, ball[i], ball[j])
            d_king = pl.word_distance(king, ball[i], ball[j])
            assert 0.5 * d_std <= d_king <= d_std


def test_generator_validation():
    with pytest.raises(pl.PercolabError):
        pl.GroupSpec("zd", 2, [(1, 0), (0, 1)])  # not symmetric
    with pytest.raises(pl.PercolabError):
        pl.GroupSpec("zd", 2, [(0, 0), (1, 0), (-1, 0)])  # identity in S


def test_epsilon_net_single_vertex():
    sp = pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(0.5, 0.0))
    net = pl.epsilon_net(sp, 1.0, stream(5))
    assert len(net) == 1
    assert net.rho == 0.0


def test_epsilon_net_disk_size_and_separation():
    sp = pl.EuclideanPlane(pl.WindowSpec(10.0, 0.0))
    net = pl.epsilon_net(sp, 1.0, stream(6))
    assert 60 <= len(net) <= 140
    d2 = ((net.points[:, None, :] - net.points[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    assert np.sqrt(d2.min()) >= 1.0
    assert net.rho <= 2.0


def test_net_graph_edge_rule():
    sp = pl.EuclideanPlane(pl.WindowSpec(10.0, 0.0))
    rho = 1.0
    pts = np.array([[0.0, 0.0], [1.5, 0.0], [3.0, 0.0]])
    graph = pl.net_graph(NetSpec(sp, pts, 1.0, rho))
    # 1.5 rho apart -> edge; 3 rho apart -> no edge (two hops via the middle)
    assert graph.distance(0, 1) == 1.0
    assert graph.distance(1, 2) == 1.0
    assert graph.distance(0, 2) == 2.0


def test_net_graph_degree_bound():
    sp = pl.EuclideanPlane(pl.WindowSpec(10.0, 0.0))
    degrees = []
    for seed in (7, 8):
        net = pl.epsilon_net(sp, 1.0, stream(seed))
        graph = pl.net_graph(net)
        degrees.append(graph.max_degree())
    assert max(degrees) <= 50
    assert abs(degrees[0] - degrees[1]) <= 10


def test_growth_degrees():
    assert 0.8 <= pl.growth_degree(pl.zd_standard(1), 16).fitted_degree <= 1.2
    assert 1.8 <= pl.growth_degree(pl.z2_standard(), 16).fitted_degree <= 2.2
    est = pl.growth_degree(pl.heisenberg(), 10)
    assert 3.5 <= est.fitted_degree <= 4.5
    sizes = [s for _, s in est.ball_sizes]
    assert np.all(np.diff(sizes) > 0)


def test_growth_requires_min_range():
    with pytest.raises(pl.PercolabError):
        pl.growth_degree(pl.z2_standard(), 3)
