"""Axiom checks and coarse parameters against brute-force oracles."""
import itertools

import numpy as np
import pytest

import coarsemedian as cm
from coarsemedian.axioms import (bounded_valency_profile, check_4pt,
                                 check_m1_m2, check_median_5pt, coarse_params,
                                 m3prime_constant, quasi_morphism_defect,
                                 rips_complex_graph, StepProfile)


@pytest.fixture(scope="module")
def small_grid():
    return cm.gen_grid([2, 2])


@pytest.fixture(scope="module")
def small_metric(small_grid):
    return cm.induced_metric(small_grid)


@pytest.fixture(scope="module")
def small_perturbed(small_grid, small_metric):
    return cm.perturb(small_grid, small_metric, cm.PerturbationSpec(1, 1))


def five_point_sides(s, a, b, c, d, e):
    lhs = s.mu(a, b, s.mu(c, d, e))
    rhs = s.mu(s.mu(a, b, c), s.mu(a, b, d), e)
    return lhs, rhs


def test_5pt_brute_force_on_cube(cube3):
    res = check_median_5pt(cube3)
    assert res.passed and res.mode == "exhaustive"
    for t in itertools.product(range(cube3.size), repeat=5):
        lhs, rhs = five_point_sides(cube3, *t)
        assert lhs == rhs


def test_5pt_witness_is_genuine(small_perturbed):
    res = check_median_5pt(small_perturbed)
    assert not res.passed
    lhs, rhs = five_point_sides(small_perturbed, *res.witness)
    assert lhs != rhs


def test_4pt_holds_on_median_and_witnessed_when_broken(grid44, small_perturbed):
    assert check_4pt(grid44).passed
    res = check_4pt(small_perturbed)
    if not res.passed:
        a, b, c, d = res.witness
        lhs = small_perturbed.mu(small_perturbed.mu(a, b, c), b, d)
        rhs = small_perturbed.mu(a, b, small_perturbed.mu(c, b, d))
        assert lhs != rhs


def m3prime_oracle(s):
    card = cm.interval_card_matrix(s)
    best = 0
    for t in itertools.product(range(s.size), repeat=5):
        lhs, rhs = five_point_sides(s, *t)
        best = max(best, int(card[lhs, rhs]))
    return best


def test_m3prime_matches_oracle(small_grid, small_perturbed):
    assert m3prime_constant(small_grid).K == 1 == m3prime_oracle(small_grid)
    res = m3prime_constant(small_perturbed)
    assert res.K == m3prime_oracle(small_perturbed)
    assert res.mode == "exhaustive" and not res.lower_bound
    # witness attains the maximum
    card = cm.interval_card_matrix(small_perturbed)
    lhs, rhs = five_point_sides(small_perturbed, *res.witness)
    assert card[lhs, rhs] == res.K


def test_sampled_never_exceeds_exhaustive(small_perturbed):
    full = m3prime_constant(small_perturbed)
    sampled = m3prime_constant(small_perturbed, budget=1, samples=20_000,
                               seed=0)
    assert sampled.mode.startswith("sampled") and sampled.lower_bound
    assert sampled.K <= full.K


def test_sampled_check_flags_lower_bound(cube3):
    res = check_median_5pt(cube3, budget=1, samples=5000, seed=1)
    assert res.mode.startswith("sampled")
    assert res.passed


def kappa4_oracle(s, d):
    best = 0
    for a, b, c, e in itertools.product(range(s.size), repeat=4):
        lhs = s.mu(s.mu(a, b, c), b, e)
        rhs = s.mu(a, b, s.mu(c, b, e))
        best = max(best, d.value(lhs, rhs))
    return best


def kappa5_oracle(s, d):
    best = 0
    for t in itertools.product(range(s.size), repeat=5):
        lhs, rhs = five_point_sides(s, *t)
        best = max(best, d.value(lhs, rhs))
    return best


def test_coarse_params_on_median_space(small_grid, small_metric):
    rep = coarse_params(small_grid, small_metric)
    assert rep.kappa0 == 0 and rep.kappa4 == 0 and rep.kappa5 == 0
    assert rep.K == 1


def test_coarse_params_match_oracles(small_perturbed, small_metric):
    rep = coarse_params(small_perturbed, small_metric)
    assert rep.kappa4 == kappa4_oracle(small_perturbed, small_metric)
    assert rep.kappa5 == kappa5_oracle(small_perturbed, small_metric)
    assert rep.kappa0 == 0  # perturbation keeps degenerate triples exact


def test_rho_envelope_oracle(small_perturbed, small_metric):
    rep = coarse_params(small_perturbed, small_metric)
    s, d = small_perturbed, small_metric
    table = {}
    for a, a2, b, c in itertools.product(range(s.size), repeat=4):
        t = d.value(a, a2)
        if t == 0:
            continue
        v = d.value(s.mu(a, b, c), s.mu(a2, b, c))
        table[t] = max(table.get(t, 0), v)
    # envelope is the running max of the per-step table
    running = 0
    for t in sorted(table):
        running = max(running, table[t])
        assert rep.rho_envelope.value_at(t) == running


def test_coarse_params_threads_agree(small_perturbed, small_metric):
    r1 = coarse_params(small_perturbed, small_metric, threads=1)
    r8 = coarse_params(small_perturbed, small_metric, threads=8)
    assert (r1.kappa4, r1.kappa5, r1.K) == (r8.kappa4, r8.kappa5, r8.K)
    assert r1.witnesses == r8.witnesses


def test_quasi_morphism_defect_oracle(small_grid, small_metric):
    # identity is exact; a constant map has the diameter-scale defect
    n = small_grid.size
    ident = list(range(n))
    assert quasi_morphism_defect(ident, small_grid, small_grid,
                                 small_metric) == 0
    const = [0] * n
    assert quasi_morphism_defect(const, small_grid, small_grid,
                                 small_metric) == 0


def test_bounded_valency_profile_oracle(grid44):
    prof = bounded_valency_profile(grid44)
    card = cm.interval_card_matrix(grid44)
    for r in (1, 2, 5, 25):
        expect = max(int((card[a] <= r).sum()) for a in range(grid44.size))
        assert prof.value_at(r) == expect


def test_rips_complex_edges(tree20):
    card = cm.interval_card_matrix(tree20)
    g = rips_complex_graph(tree20, 1)
    expect = {(a, b) for a in range(tree20.size)
              for b in range(a + 1, tree20.size) if card[a, b] <= 2}
    assert set(g.edges) == expect


def test_step_profile_semantics():
    p = StepProfile({0: 1, 3: 5, 5: 2})
    # cumulative max, right-continuous steps
    assert p.value_at(0) == 1
    assert p.value_at(2) == 1
    assert p.value_at(3) == 5
    assert p.value_at(10) == 5
    assert p.as_table() == {0: 1, 3: 5, 5: 5}


def test_m1_m2_detects_violations(cube3):
    tbl = cube3.table3.copy()
    tbl[1, 1, 2] = 0
    bad = cm.FiniteTernarySpace(cube3.size, "bad", table=tbl.ravel())
    res = check_m1_m2(bad)
    assert not res.passed and res.witness is not None
