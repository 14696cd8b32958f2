"""Generators: graphs, cubes, grids, trees, products, perturbations."""
import itertools

import numpy as np
import pytest

import coarsemedian as cm
from coarsemedian.axioms import check_m1_m2, check_median_5pt, quasi_morphism_defect
from coarsemedian.errors import InputError
from coarsemedian.generators import (gen_spiked_line, graph_distances,
                                     graph_path_metric, graph_spec,
                                     load_genspec, spiked_line_graph)


def path_graph(n):
    return graph_spec(n, [(i, i + 1) for i in range(n - 1)])


def test_graph_spec_canonicalizes_edges():
    g = graph_spec(3, [(2, 1), (1, 0)])
    assert g.edges == frozenset({(0, 1), (1, 2)})
    with pytest.raises(InputError):
        graph_spec(3, [(0, 3)])
    with pytest.raises(InputError):
        graph_spec(3, [(1, 1)])


def test_graph_distances_disconnected_rejected():
    with pytest.raises(InputError):
        graph_distances(graph_spec(4, [(0, 1), (2, 3)]))


def test_graph_median_on_path_is_middle_point():
    s = cm.gen_graph_median(path_graph(7))
    for a in range(7):
        for b in range(7):
            for c in range(7):
                vals = sorted((a, b, c))
                assert s.mu(a, b, c) == vals[1]


def test_tree_median_brute_force_oracle():
    # nu(a,x,b) must land on the a-b geodesic at minimal distance to x
    g = graph_spec(9, [(0, 1), (1, 2), (1, 3), (3, 4), (0, 5), (5, 6),
                       (6, 7), (3, 8)])
    s = cm.gen_graph_median(g)
    dist = graph_distances(g)
    for a in range(9):
        for b in range(9):
            geo = [v for v in range(9)
                   if dist[a, v] + dist[v, b] == dist[a, b]]
            for x in range(9):
                m = s.mu(a, x, b)
                assert m in geo
                assert dist[x, m] == min(dist[x, v] for v in geo)


def test_tree_genspec_round_trip():
    s = cm.gen_tree_random(12, 4)
    assert np.array_equal(load_genspec(s.genspec).table, s.table)


def test_hypercube_is_exact_median():
    for n in (1, 2, 3):
        s = cm.gen_hypercube(n)
        assert s.median
        assert check_m1_m2(s).passed
        assert check_median_5pt(s).passed


def test_grid_median_coordinatewise_oracle():
    # dims [a,b] means coordinates 0..a and 0..b inclusive
    dims = [3, 4]
    s = cm.gen_grid(dims)
    w = dims[1] + 1

    def coords(i):
        return (i // w, i % w)

    def idx(x, y):
        return x * w + y

    for a in range(s.size):
        for b in range(s.size):
            for c in range(s.size):
                pts = [coords(v) for v in (a, b, c)]
                mid = tuple(sorted(col)[1] for col in zip(*pts))
                assert s.mu(a, b, c) == idx(*mid)


def test_grid_rejects_bad_dims():
    with pytest.raises(InputError):
        cm.gen_grid([])
    with pytest.raises(InputError):
        cm.gen_grid([0, 3])


def test_product_median_is_componentwise():
    a = cm.gen_grid([3])
    b = cm.gen_hypercube(2)
    p = cm.gen_product(a, b)
    assert p.size == a.size * b.size
    for x in range(p.size):
        for y in range(p.size):
            for z in range(p.size):
                x1, x2 = divmod(x, b.size)
                y1, y2 = divmod(y, b.size)
                z1, z2 = divmod(z, b.size)
                expect = a.mu(x1, y1, z1) * b.size + b.mu(x2, y2, z2)
                assert p.mu(x, y, z) == expect


def test_product_genspec_reload():
    p = cm.gen_product(cm.gen_grid([3]), cm.gen_hypercube(2))
    q = load_genspec(p.genspec)
    assert np.array_equal(p.table, q.table)


def test_spiked_line_shapes():
    for m in (2, 3, 5):
        T, X, inc = gen_spiked_line(m)
        seg = 2 * m + 1
        spikes = sum(abs(n) for n in range(-m, m + 1) if n != 0)
        assert T.size == seg + spikes
        assert X.size == seg + 2 * m  # segment plus one leaf per nonzero n
        assert len(inc) == X.size
        assert len(set(inc)) == X.size


def test_spiked_line_inclusion_is_exact_quasi_morphism():
    T, X, inc = gen_spiked_line(3)
    dT = cm.induced_metric(T)
    assert quasi_morphism_defect(inc, X, T, dT) == 0


def test_spiked_line_leaf_interval_cards():
    # leaf-to-base interval has 2 points in X but |n|+1 points upstairs
    for m in (2, 4):
        T, X, inc = gen_spiked_line(m)
        cardX = cm.interval_card_matrix(X)
        cardT = cm.interval_card_matrix(T)
        seg = 2 * m + 1
        leaf_ints = [n for n in range(-m, m + 1) if n != 0]
        for k, n in enumerate(leaf_ints):
            leaf = seg + k
            base = n + m
            assert cardX[leaf, base] == 2
            assert cardT[inc[leaf], inc[base]] == abs(n) + 1


def test_perturb_keeps_m1_m2_and_stays_within_radius(grid44, grid44_metric):
    p = cm.perturb(grid44, grid44_metric, cm.PerturbationSpec(1, 5))
    assert check_m1_m2(p).passed
    moved = grid44_metric.num[grid44.table, p.table]
    assert int(moved.max()) <= 1


def test_perturb_is_seed_deterministic(grid44, grid44_metric):
    p1 = cm.perturb(grid44, grid44_metric, cm.PerturbationSpec(1, 9))
    p2 = cm.perturb(grid44, grid44_metric, cm.PerturbationSpec(1, 9))
    p3 = cm.perturb(grid44, grid44_metric, cm.PerturbationSpec(1, 10))
    assert np.array_equal(p1.table, p2.table)
    assert not np.array_equal(p1.table, p3.table)


def test_reference_metric_hamming_and_l1():
    c = cm.gen_hypercube(3)
    d = cm.reference_metric(c)
    for a in range(8):
        for b in range(8):
            assert d.value(a, b) == bin(a ^ b).count("1")
    g = cm.gen_grid([3, 4])
    dg = cm.reference_metric(g)
    for a in range(g.size):
        for b in range(g.size):
            ax, ay = divmod(a, 5)
            bx, by = divmod(b, 5)
            assert dg.value(a, b) == abs(ax - bx) + abs(ay - by)


def test_reference_metric_path_graph():
    s = cm.gen_graph_median(path_graph(7))
    d = cm.reference_metric(s)
    for a in range(7):
        for b in range(7):
            assert d.value(a, b) == abs(a - b)
