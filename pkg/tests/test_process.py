import numpy as np
import pytest
from scipy import stats

import percolab as pl
from percolab.rng import stream
from percolab.spaces import CellPartition

AREA10_L = np.sqrt(10.0 / np.pi)  # disk window of Lebesgue measure 10


@pytest.fixture(scope="module")
def win10():
    return pl.EuclideanPlane(pl.WindowSpec(AREA10_L, 0.0))


def test_near_zero_intensity_is_empty(win10):
    part = CellPartition.trivial_for(win10)
    cfg = pl.sample_poisson(win10, part, pl.homogeneous(1e-12), seed=3)
    assert cfg.n == 0


def test_poisson_total_count_mean(win10):
    part = CellPartition.trivial_for(win10)
    counts = [pl.sample_poisson(win10, part, pl.homogeneous(2.0), seed=s).n
              for s in range(1000)]
    assert abs(np.mean(counts) - 20.0) <= 1.4


def test_poisson_per_cell_dispersion():
    sp = pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(2.0, 0.0))
    part = pl.build_window_partition(sp, 1.0, stream(9))
    counts = np.array([pl.sample_poisson(sp, part, pl.homogeneous(1.5),
                                         seed=s).cell_counts(len(part))
                       for s in range(10000)])
    for i in range(0, len(part), 3):
        m, v = counts[:, i].mean(), counts[:, i].var()
        assert abs(v / m - 1.0) < 0.1


def test_poisson_cell_index_matches_rule():
    sp = pl.EuclideanPlane(pl.WindowSpec(6.0, 0.0))
    part = pl.build_window_partition(sp, 1.5, stream(10),
                                     measure_samples=3000)
    cfg = pl.sample_poisson(sp, part, pl.homogeneous(1.0), seed=4)
    assert np.array_equal(part.assign(cfg.points), cfg.cell_index)


def test_poisson_star_field_requires_induction(win10):
    part = CellPartition.trivial_for(win10)
    with pytest.raises(pl.PercolabError, match="measure not induced"):
        pl.sample_poisson(win10, part, pl.homogeneous(1.0),
                          measure_field="star", seed=1)


def test_bernoulli_extremes_and_count():
    sp = pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(70.0, 0.0))
    n = sp.vertex_count()
    assert pl.sample_bernoulli(sp, 1.0, seed=1).n == n
    assert pl.sample_bernoulli(sp, 0.0, seed=1).n == 0
    cnt = pl.sample_bernoulli(sp, 0.5, seed=2).n
    assert abs(cnt - 0.5 * n) <= 150.0 * n / 10000.0
    with pytest.raises(pl.PercolabError):
        pl.sample_bernoulli(sp, 1.5, seed=1)


def test_bernoulli_retention_formula():
    assert pl.bernoulli_retention(0.0, 1.0) == 0.0
    assert pl.bernoulli_retention(np.log(2.0), 1.0) == pytest.approx(0.5)
    assert pl.bernoulli_retention(0.8982, 1.0) == pytest.approx(0.5927,
                                                                abs=1e-4)
    with pytest.raises(pl.PercolabError):
        pl.bernoulli_retention(-1.0, 1.0)


def test_thin_extremes(win10):
    part = CellPartition.trivial_for(win10)
    cfg = pl.sample_poisson(win10, part, pl.homogeneous(3.0), seed=5)
    kept = pl.thin(cfg, 1.0, seed=6)
    assert np.array_equal(kept.points, cfg.points)
    assert pl.thin(cfg, 0.0, seed=6).n == 0
    with pytest.raises(pl.PercolabError):
        pl.thin(cfg, 1.2, seed=6)


def _count_chi2(a, b):
    """Two-sample chi-square on count distributions, pooled bins with
    expected >= 5."""
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    bins = np.arange(lo, hi + 2)
    ca, _ = np.histogram(a, bins)
    cb, _ = np.histogram(b, bins)
    # merge sparse bins left to right
    ma, mb = [], []
    acc_a = acc_b = 0
    for x, y in zip(ca, cb):
        acc_a += x
        acc_b += y
        if acc_a + acc_b >= 10:
            ma.append(acc_a)
            mb.append(acc_b)
            acc_a = acc_b = 0
    if acc_a + acc_b:
        ma[-1] += acc_a
        mb[-1] += acc_b
    obs = np.array([ma, mb], float)
    chi2, p, _, _ = stats.chi2_contingency(obs)
    return p


def test_thinning_matches_direct_poisson(win10):
    part = CellPartition.trivial_for(win10)
    thinned = np.array([pl.thin(
        pl.sample_poisson(win10, part, pl.homogeneous(2.0), seed=s),
        0.5, seed=s + 50000).n for s in range(1000)])
    direct = np.array([pl.sample_poisson(win10, part, pl.homogeneous(1.0),
                                         seed=s + 100000).n
                       for s in range(1000)])
    assert _count_chi2(thinned, direct) > 0.01


def test_thinning_idempotence_law(win10):
    part = CellPartition.trivial_for(win10)
    twice = []
    once = []
    for s in range(1000):
        cfg = pl.sample_poisson(win10, part, pl.homogeneous(3.0), seed=s)
        twice.append(pl.thin(pl.thin(cfg, 0.6, seed=s + 1), 0.5,
                             seed=s + 2).n)
        cfg2 = pl.sample_poisson(win10, part, pl.homogeneous(3.0),
                                 seed=s + 200000)
        once.append(pl.thin(cfg2, 0.3, seed=s + 3).n)
    assert _count_chi2(np.array(twice), np.array(once)) > 0.01


def test_couple_monotone_subset_and_marginal(win10):
    part = CellPartition.trivial_for(win10)
    low_counts = []
    for s in range(1000):
        low, high = pl.couple_monotone(win10, part, 0.7, 2.0, seed=s)
        if s < 50:
            # exact pointwise inclusion
            hset = {tuple(p) for p in high.points}
            assert all(tuple(p) in hset for p in low.points)
        low_counts.append(low.n)
    mean = np.mean(low_counts)
    target = 0.7 * 10.0
    assert abs(mean - target) <= 3.0 * np.sqrt(target / 1000)
    with pytest.raises(pl.PercolabError):
        pl.couple_monotone(win10, part, 2.0, 1.0, seed=0)


def test_couple_equal_intensities_identical(win10):
    part = CellPartition.trivial_for(win10)
    low, high = pl.couple_monotone(win10, part, 1.5, 1.5, seed=3)
    assert np.array_equal(low.points, high.points)


def test_sandwich_inclusions_and_means():
    sp = pl.EuclideanPlane(pl.WindowSpec(4.0, 0.0))
    part = CellPartition.trivial_for(sp)
    lam_fn = lambda P: 1.0 + 0.5 * np.sin(P[:, 0])
    spec = pl.bounded(lam_fn, 0.5, 1.5)
    area = np.pi * 16.0
    lows, mids, tops = [], [], []
    for s in range(500):
        low, mid, top = pl.sandwich_bounded(sp, part, spec, seed=s)
        if s < 50:
            tset = {tuple(p) for p in top.points}
            mset = {tuple(p) for p in mid.points}
            assert all(tuple(p) in mset for p in low.points)
            assert all(tuple(p) in tset for p in mid.points)
        lows.append(low.n)
        mids.append(mid.n)
        tops.append(top.n)
    # by symmetry the sine integrates to zero over the disk
    for vals, target in ((lows, 0.5 * area), (mids, area),
                         (tops, 1.5 * area)):
        assert abs(np.mean(vals) - target) <= 3 * np.sqrt(target / 500)


def test_sandwich_constant_intensity_all_equal():
    sp = pl.EuclideanPlane(pl.WindowSpec(3.0, 0.0))
    part = CellPartition.trivial_for(sp)
    spec = pl.bounded(lambda P: np.full(len(P), 1.0), 1.0, 1.0)
    low, mid, top = pl.sandwich_bounded(sp, part, spec, seed=9)
    assert np.array_equal(low.points, top.points)
    assert np.array_equal(mid.points, top.points)


def test_cell_counts_independent():
    sp = pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(2.0, 0.0))
    part = pl.build_window_partition(sp, 1.0, stream(12))
    a, b = [], []
    for s in range(2000):
        c = pl.sample_poisson(sp, part, pl.homogeneous(1.0),
                              seed=s).cell_counts(len(part))
        a.append(min(c[0], 3))
        b.append(min(c[1], 3))
    table = np.zeros((4, 4))
    for x, y in zip(a, b):
        table[x, y] += 1
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    _, p, _, _ = stats.chi2_contingency(table)
    assert p > 0.01


def test_determinism_bit_identical(win10):
    part = CellPartition.trivial_for(win10)
    a = pl.sample_poisson(win10, part, pl.homogeneous(2.0), seed=77)
    b = pl.sample_poisson(win10, part, pl.homogeneous(2.0), seed=77)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.cell_index, b.cell_index)
