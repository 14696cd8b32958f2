"""Metric layer: induced metric, Hausdorff, Gromov delta, QI fits."""
from collections import deque
from fractions import Fraction

import numpy as np
import pytest

import coarsemedian as cm
from coarsemedian.errors import InputError
from coarsemedian.metrics import MetricMatrix, metric_from_distances


def bfs_distances(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    out = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        out[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if out[s, v] < 0:
                    out[s, v] = out[s, u] + 1
                    q.append(v)
    return out


def graph_edges(space):
    # unit-interval pairs form the edge set of the underlying graph
    card = cm.interval_card_matrix(space)
    return [(a, b) for a in range(space.size) for b in range(a + 1, space.size)
            if card[a, b] == 2]


@pytest.mark.parametrize("space", [
    cm.gen_hypercube(3),
    cm.gen_grid([4, 4]),
    cm.gen_tree_random(40, 1),
    cm.gen_grid([2, 2, 2]),
])
def test_induced_metric_equals_bfs(space):
    d = cm.induced_metric(space)
    bfs = bfs_distances(space.size, graph_edges(space))
    assert d.den == 1
    assert np.array_equal(d.num, bfs)


def test_induced_metric_rejects_broken_t1_t2():
    s = cm.gen_hypercube(2)
    tbl = s.table3.copy()
    tbl[0, 0, 3] = 1  # majority vote broken
    broken = cm.FiniteTernarySpace(4, "broken", table=tbl.ravel())
    with pytest.raises(InputError):
        cm.induced_metric(broken)
    tbl2 = s.table3.copy()
    tbl2[0, 1, 3] = 0  # reversal broken: mu(3,1,0) still 1
    broken2 = cm.FiniteTernarySpace(4, "broken2", table=tbl2.ravel())
    with pytest.raises(InputError):
        cm.induced_metric(broken2)


def test_metric_matrix_validation():
    with pytest.raises(InputError):
        MetricMatrix(np.array([[0, 1], [2, 0]]))  # not symmetric
    with pytest.raises(InputError):
        MetricMatrix(np.array([[1, 1], [1, 0]]))  # nonzero diagonal
    with pytest.raises(InputError):
        MetricMatrix(np.array([[0, 5, 1], [5, 0, 1], [1, 1, 0]]))  # triangle
    ok = MetricMatrix(np.array([[0, 2], [2, 0]]), den=2)
    assert ok.value(0, 1) == 1


def test_hausdorff_brute_force(grid44_metric):
    rng = np.random.default_rng(3)
    d = grid44_metric
    for _ in range(50):
        A = rng.choice(d.size, 4, replace=False).tolist()
        B = rng.choice(d.size, 5, replace=False).tolist()
        expect = max(max(min(d.value(a, b) for b in B) for a in A),
                     max(min(d.value(a, b) for a in A) for b in B))
        assert cm.hausdorff(d, A, B) == expect


def test_neighborhood_brute_force(grid44_metric):
    d = grid44_metric
    got = cm.neighborhood(d, [0, 7], 2)
    expect = sorted(x for x in range(d.size)
                    if min(d.value(x, 0), d.value(x, 7)) <= 2)
    assert sorted(got) == expect


def gromov_oracle(d):
    # max over quadruples of the four-point defect, halved
    n = d.size
    best = Fraction(0)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for p in range(n):
                    ab = d.value(a, p) + d.value(b, p) - d.value(a, b)
                    ac = d.value(a, p) + d.value(c, p) - d.value(a, c)
                    bc = d.value(b, p) + d.value(c, p) - d.value(b, c)
                    v = Fraction(min(ac, bc) - ab, 2)
                    if v > best:
                        best = v
    return best


def test_gromov_delta_matches_oracle():
    for space in (cm.gen_tree_random(9, 5), cm.gen_grid([2, 2]),
                  cm.gen_hypercube(3)):
        d = cm.induced_metric(space)
        assert cm.gromov_delta(d) == gromov_oracle(d)


def test_gromov_delta_zero_on_trees():
    for seed in range(4):
        d = cm.induced_metric(cm.gen_tree_random(25, seed))
        assert cm.gromov_delta(d) == 0


def test_quasi_isometry_fit_identity(grid44_metric):
    fit = cm.quasi_isometry_fit(grid44_metric, grid44_metric)
    assert fit.L == 1 and fit.C == 0
    assert fit.L_affine == 1 and fit.C_affine == 0


def test_quasi_isometry_fit_scaled(grid44_metric):
    doubled = MetricMatrix(grid44_metric.num * 2, grid44_metric.den)
    fit = cm.quasi_isometry_fit(grid44_metric, doubled)
    assert fit.L == 2 and fit.C == 0


def test_quasi_isometry_fit_size_mismatch(grid44_metric):
    with pytest.raises(InputError):
        cm.quasi_isometry_fit(grid44_metric, MetricMatrix(np.zeros((2, 2),
                                                                   dtype=int)))


def test_metric_from_distances():
    d = metric_from_distances([[0, 1], [1, 0]])
    assert d.value(0, 1) == 1 and d.den == 1
