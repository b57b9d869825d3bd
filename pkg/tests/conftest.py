import numpy as np
import pytest

import percolab as pl
from percolab.rng import stream


@pytest.fixture(scope="session")
def euclid10():
    return pl.EuclideanPlane(pl.WindowSpec(10.0, 0.0))


@pytest.fixture(scope="session")
def hyp5():
    return pl.HyperbolicDisk(pl.WindowSpec(5.0, 1.0))


@pytest.fixture(scope="session")
def z2_space():
    return pl.CayleyGraph(pl.z2_standard(), pl.WindowSpec(8.0, 1.0))


@pytest.fixture(scope="session")
def king_space():
    return pl.CayleyGraph(pl.z2_king(), pl.WindowSpec(8.0, 1.0))


@pytest.fixture()
def rng():
    return stream(20260809)


def dfs_labels(n, eu, ev):
    """Brute-force component labels (oracle for union-find)."""
    adj = [[] for _ in range(n)]
    for a, b in zip(eu, ev):
        adj[a].append(b)
        adj[b].append(a)
    labels = np.full(n, -1, np.int64)
    for s in range(n):
        if labels[s] >= 0:
            continue
        stack = [s]
        labels[s] = s
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if labels[v] < 0:
                    labels[v] = s
                    stack.append(v)
    return labels
