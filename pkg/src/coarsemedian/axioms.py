"""Axiom checks and measured axiom constants.

Every scan is exhaustive when the tuple count fits the budget, otherwise
it samples seeded tuples and reports a flagged lower bound.  Exhaustive
enumeration is vectorized per leading pair (a,b) and partitioned across
threads on the leading index; results are independent of the thread count.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import rng
from .core import FiniteTernarySpace, interval_card_matrix
from .errors import InputError
from .generators import GraphSpec, graph_spec
from .metrics import MetricMatrix, QIFit, induced_metric, quasi_isometry_fit
from .parallel import map_chunks

DEFAULT_BUDGET = 300_000_000
DEFAULT_SAMPLES = 1_000_000


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    witness: tuple | None
    mode: str
    checked: int


@dataclass(frozen=True)
class M3PrimeResult:
    K: int
    witness: tuple | None
    mode: str
    lower_bound: bool


class StepProfile:
    """Non-decreasing step function given by values at realized breakpoints;
    between breakpoints the value is that of the largest breakpoint below."""

    def __init__(self, table: dict):
        self.points = sorted(table)
        vals = []
        run = None
        for p in self.points:
            run = table[p] if run is None else max(run, table[p])
            vals.append(run)
        self.values = vals

    def as_table(self) -> dict:
        return dict(zip(self.points, self.values))

    def value_at(self, r):
        out = None
        for p, v in zip(self.points, self.values):
            if p <= r:
                out = v
            else:
                break
        return out


@dataclass
class ParamReport:
    kappa0: object
    rho_envelope: StepProfile
    rho_affine: tuple  # (slope Fraction, intercept)
    kappa4: object
    kappa5: object
    K: int
    mode: dict
    witnesses: dict
    lower_bound: dict


def check_m1_m2(space: FiniteTernarySpace) -> CheckResult:
    n = space.size
    idx = np.arange(n, dtype=np.int64)
    a, b = idx[:, None], idx[None, :]
    m1 = space.mu_bulk(a, a, b)
    bad = np.nonzero(m1 != a)
    if bad[0].size:
        i = (int(bad[0][0]), int(bad[0][0]), int(bad[1][0]))
        return CheckResult(False, i, "exhaustive", n * n)
    t = space.mu_bulk(idx[:, None, None], idx[None, :, None], idx[None, None, :])
    for perm in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        bad = np.nonzero(t != t.transpose(perm))
        if bad[0].size:
            w = (int(bad[0][0]), int(bad[1][0]), int(bad[2][0]))
            return CheckResult(False, w, "exhaustive", n ** 3)
    return CheckResult(True, None, "exhaustive", n ** 3)


def _cde_grids(n):
    r = np.arange(n, dtype=np.int64)
    c = np.repeat(r, n * n)
    d = np.tile(np.repeat(r, n), n)
    e = np.tile(r, n * n)
    return c, d, e


def _five_point_sides(space, a, b, cflat, dflat, eflat=None):
    """lhs/rhs of (M3) over all (c,d,e) for fixed (a,b), flattened in
    lexicographic (c,d,e) order.  The flat table itself is mu(c,d,e)."""
    n = space.size
    tbl = space.table
    base = (a * n + b) * n
    mu_ab = tbl[base:base + n]
    lhs = tbl[base + tbl]
    if eflat is None:
        eflat = np.arange(n * n * n, dtype=np.int64) % n
    rhs = tbl[(mu_ab[cflat] * n + mu_ab[dflat]) * n + eflat]
    return lhs, rhs


def check_median_5pt(space: FiniteTernarySpace, budget: int = DEFAULT_BUDGET,
                     samples: int = DEFAULT_SAMPLES, seed: int = 0,
                     threads: int = 1) -> CheckResult:
    n = space.size
    if n ** 5 <= budget:
        cflat, dflat, eflat = _cde_grids(n)

        def worker(lo, hi):
            for a in range(lo, hi):
                for b in range(n):
                    lhs, rhs = _five_point_sides(space, a, b, cflat, dflat, eflat)
                    bad = np.nonzero(lhs != rhs)[0]
                    if bad.size:
                        i = int(bad[0])
                        return (a, b, i // (n * n), (i // n) % n, i % n)
            return None

        wit = map_chunks(n, worker, lambda x, y: x if x is not None else y,
                         None, threads)
        return CheckResult(wit is None, wit, "exhaustive", n ** 5)
    return _sampled_check(space, 5, _eval_5pt_batch, samples, seed)


def _eval_5pt_batch(space, t):
    n = space.size
    tbl = space.table
    a, b, c, d, e = (t[:, i] for i in range(5))
    mab = lambda x: tbl[(a * n + b) * n + x]
    lhs = mab(tbl[(c * n + d) * n + e])
    rhs = tbl[(mab(c) * n + mab(d)) * n + e]
    return lhs, rhs


def _eval_4pt_batch(space, t):
    n = space.size
    tbl = space.table
    a, b, c, d = (t[:, i] for i in range(4))
    lhs = tbl[(tbl[(a * n + b) * n + c] * n + b) * n + d]
    rhs = tbl[(a * n + b) * n + tbl[(c * n + b) * n + d]]
    return lhs, rhs


def _sampled_check(space, k, evaluator, samples, seed) -> CheckResult:
    n = space.size
    batch = 200_000
    done = 0
    while done < samples:
        take = min(batch, samples - done)
        t = rng.sample_indices(seed, done, take, k, n)
        lhs, rhs = evaluator(space, t)
        bad = np.nonzero(lhs != rhs)[0]
        if bad.size:
            w = tuple(int(v) for v in t[int(bad[0])])
            return CheckResult(False, w, f"sampled(n={samples},seed={seed})",
                               done + int(bad[0]) + 1)
        done += take
    return CheckResult(True, None, f"sampled(n={samples},seed={seed})", samples)


def check_4pt(space: FiniteTernarySpace, budget: int = DEFAULT_BUDGET,
              samples: int = DEFAULT_SAMPLES, seed: int = 0,
              threads: int = 1) -> CheckResult:
    n = space.size
    if n ** 4 <= budget:
        tbl = space.table
        t3 = space.table3
        r = np.arange(n, dtype=np.int64)

        def worker(lo, hi):
            for a in range(lo, hi):
                for b in range(n):
                    mu_ab = tbl[(a * n + b) * n:(a * n + b) * n + n]
                    lhs = tbl[(mu_ab[:, None] * n + b) * n + r[None, :]]
                    rhs = tbl[(a * n + b) * n + t3[:, b, :]]
                    bad = np.nonzero(lhs != rhs)
                    if bad[0].size:
                        return (a, b, int(bad[0][0]), int(bad[1][0]))
            return None

        wit = map_chunks(n, worker, lambda x, y: x if x is not None else y,
                         None, threads)
        return CheckResult(wit is None, wit, "exhaustive", n ** 4)
    return _sampled_check(space, 4, _eval_4pt_batch, samples, seed)


def m3prime_constant(space: FiniteTernarySpace, budget: int = DEFAULT_BUDGET,
                     samples: int = DEFAULT_SAMPLES, seed: int = 0,
                     threads: int = 1) -> M3PrimeResult:
    """K = max over 5-tuples of card [lhs, rhs] for the (M3) sides."""
    n = space.size
    card = interval_card_matrix(space)
    if n ** 5 <= budget:
        cflat, dflat, eflat = _cde_grids(n)

        def worker(lo, hi):
            best, wit = -1, None
            for a in range(lo, hi):
                for b in range(n):
                    lhs, rhs = _five_point_sides(space, a, b, cflat, dflat, eflat)
                    k = card[lhs, rhs]
                    i = int(np.argmax(k))
                    v = int(k[i])
                    if v > best:
                        best = v
                        wit = (a, b, i // (n * n), (i // n) % n, i % n)
            return best, wit

        def merge(x, y):
            if x[0] > y[0] or (x[0] == y[0] and (y[1] is None or
                                                 (x[1] is not None and x[1] <= y[1]))):
                return x
            return y

        best, wit = map_chunks(n, worker, merge, (-1, None), threads)
        return M3PrimeResult(best, wit, "exhaustive", False)
    best, wit = -1, None
    batch = 200_000
    done = 0
    while done < samples:
        take = min(batch, samples - done)
        t = rng.sample_indices(seed, done, take, 5, n)
        lhs, rhs = _eval_5pt_batch(space, t)
        k = card[lhs, rhs]
        i = int(np.argmax(k))
        if int(k[i]) > best:
            best = int(k[i])
            wit = tuple(int(v) for v in t[i])
        done += take
    return M3PrimeResult(best, wit, f"sampled(n={samples},seed={seed})", True)


def _max_with_witness_2d(vals, shape_fn):
    i = int(np.argmax(vals))
    return int(vals.ravel()[i]), shape_fn(i)


def coarse_params(space: FiniteTernarySpace, d: MetricMatrix,
                  budget: int = DEFAULT_BUDGET, samples: int = DEFAULT_SAMPLES,
                  seed: int = 0, threads: int = 1) -> ParamReport:
    n = space.size
    if d.size != n:
        raise InputError("metric size does not match the space")
    dn = d.num
    tbl = space.table
    t3 = space.table3
    idx = np.arange(n, dtype=np.int64)
    mode = {}
    witnesses = {}
    lower = {}

    # kappa0: C0 defect = max over triples/permutations of d(mu, mu_sigma),
    # together with the localisation defect d(mu(a,a,b), a)
    t = t3
    k0 = 0
    w0 = None
    for perm in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        vals = dn[t, t.transpose(perm)]
        v, wit = _max_with_witness_2d(vals, lambda i: (i // (n * n), (i // n) % n, i % n))
        if v > k0:
            k0, w0 = v, wit
    loc = dn[space.mu_bulk(idx[:, None], idx[:, None], idx[None, :]), idx[:, None]]
    v, wit = _max_with_witness_2d(loc, lambda i: (i // n, i // n, i % n))
    if v > k0:
        k0, w0 = v, wit
    mode["kappa0"] = "exhaustive"
    witnesses["kappa0"] = w0
    lower["kappa0"] = False

    # rho envelope over realized d(a,a'); exhaustive N^4
    rho_tab = {}
    rho_wit = None
    rho_max = -1
    if n ** 4 <= budget:
        def rho_worker(lo, hi):
            part = {}
            best = (-1, None)
            for a in range(lo, hi):
                lhs_all = t3[a].ravel()
                for a2 in range(n):
                    tt = int(dn[a, a2])
                    disp = dn[lhs_all, t3[a2].ravel()]
                    i = int(np.argmax(disp))
                    v = int(disp[i])
                    if v > part.get(tt, -1):
                        part[tt] = v
                    if v > best[0]:
                        best = (v, (a, a2, i // n, i % n))
            return part, best

        def rho_merge(acc, part):
            tab, best = acc
            p, b = part
            for k, v in p.items():
                if v > tab.get(k, -1):
                    tab[k] = v
            if b[0] > best[0] or (b[0] == best[0] and best[1] is not None
                                  and b[1] is not None and b[1] < best[1]):
                best = b
            return tab, best

        (rho_tab, (rho_max, rho_wit)) = map_chunks(
            n, rho_worker, rho_merge, ({}, (-1, None)), threads)
        mode["rho"] = "exhaustive"
        lower["rho"] = False
    else:
        done = 0
        while done < samples:
            take = min(200_000, samples - done)
            tt = rng.sample_indices(seed, done, take, 4, n)
            a, a2, b, c = (tt[:, i] for i in range(4))
            disp = dn[tbl[(a * n + b) * n + c], tbl[(a2 * n + b) * n + c]]
            dv = dn[a, a2]
            for u in np.unique(dv):
                m = int(disp[dv == u].max())
                if m > rho_tab.get(int(u), -1):
                    rho_tab[int(u)] = m
            i = int(np.argmax(disp))
            if int(disp[i]) > rho_max:
                rho_max = int(disp[i])
                rho_wit = tuple(int(v) for v in tt[i])
            done += take
        mode["rho"] = f"sampled(n={samples},seed={seed})"
        lower["rho"] = True
    rho_tab.setdefault(0, 0)
    rho = StepProfile({d.scalar(k): d.scalar(v) for k, v in rho_tab.items()})
    witnesses["rho"] = rho_wit
    slope = Fraction(0)
    for k, v in rho_tab.items():
        if k > 0:
            slope = max(slope, Fraction(v, k))
    rho_affine = (slope, 0)

    # kappa4 over N^4
    if n ** 4 <= budget:
        r = idx

        def k4_worker(lo, hi):
            best, wit = -1, None
            for a in range(lo, hi):
                for b in range(n):
                    mu_ab = tbl[(a * n + b) * n:(a * n + b) * n + n]
                    lhs = tbl[(mu_ab[:, None] * n + b) * n + r[None, :]]
                    rhs = tbl[(a * n + b) * n + t3[:, b, :]]
                    vals = dn[lhs, rhs]
                    i = int(np.argmax(vals))
                    v = int(vals.ravel()[i])
                    if v > best:
                        best, wit = v, (a, b, i // n, i % n)
            return best, wit

        def pick(x, y):
            return x if (x[0] > y[0] or (x[0] == y[0] and y[1] is None)
                         or (x[0] == y[0] and x[1] is not None and x[1] <= y[1])) else y

        k4, w4 = map_chunks(n, k4_worker, pick, (-1, None), threads)
        mode["kappa4"] = "exhaustive"
        lower["kappa4"] = False
    else:
        k4, w4 = -1, None
        done = 0
        while done < samples:
            take = min(200_000, samples - done)
            tt = rng.sample_indices(seed, done, take, 4, n)
            lhs, rhs = _eval_4pt_batch(space, tt)
            vals = dn[lhs, rhs]
            i = int(np.argmax(vals))
            if int(vals[i]) > k4:
                k4, w4 = int(vals[i]), tuple(int(v) for v in tt[i])
            done += take
        mode["kappa4"] = f"sampled(n={samples},seed={seed})"
        lower["kappa4"] = True
    witnesses["kappa4"] = w4

    # kappa5 over N^5
    if n ** 5 <= budget:
        cflat, dflat, eflat = _cde_grids(n)

        def k5_worker(lo, hi):
            best, wit = -1, None
            for a in range(lo, hi):
                for b in range(n):
                    lhs, rhs = _five_point_sides(space, a, b, cflat, dflat, eflat)
                    vals = dn[lhs, rhs]
                    i = int(np.argmax(vals))
                    v = int(vals[i])
                    if v > best:
                        best = v
                        wit = (a, b, i // (n * n), (i // n) % n, i % n)
            return best, wit

        def pick5(x, y):
            return x if (x[0] > y[0] or (x[0] == y[0] and y[1] is None)
                         or (x[0] == y[0] and x[1] is not None and x[1] <= y[1])) else y

        k5, w5 = map_chunks(n, k5_worker, pick5, (-1, None), threads)
        mode["kappa5"] = "exhaustive"
        lower["kappa5"] = False
    else:
        k5, w5 = -1, None
        done = 0
        while done < samples:
            take = min(200_000, samples - done)
            tt = rng.sample_indices(seed, done, take, 5, n)
            lhs, rhs = _eval_5pt_batch(space, tt)
            vals = dn[lhs, rhs]
            i = int(np.argmax(vals))
            if int(vals[i]) > k5:
                k5, w5 = int(vals[i]), tuple(int(v) for v in tt[i])
            done += take
        mode["kappa5"] = f"sampled(n={samples},seed={seed})"
        lower["kappa5"] = True
    witnesses["kappa5"] = w5

    m3 = m3prime_constant(space, budget=budget, samples=samples, seed=seed,
                          threads=threads)
    mode["K"] = m3.mode
    lower["K"] = m3.lower_bound
    witnesses["K"] = m3.witness

    return ParamReport(d.scalar(k0), rho, rho_affine, d.scalar(k4),
                       d.scalar(k5), m3.K, mode, witnesses, lower)


def quasi_morphism_defect(f, space1: FiniteTernarySpace,
                          space2: FiniteTernarySpace, d2: MetricMatrix):
    """max over triples of d2( mu2(f a, f b, f c), f(mu1(a,b,c)) )."""
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (space1.size,):
        raise InputError("f must map every point of the source space")
    if f.min() < 0 or f.max() >= space2.size:
        raise InputError("f maps outside the target space")
    n = space1.size
    idx = np.arange(n, dtype=np.int64)
    a, b, c = idx[:, None, None], idx[None, :, None], idx[None, None, :]
    m1 = space1.mu_bulk(a, b, c)
    m2 = space2.mu_bulk(f[a], f[b], f[c])
    return d2.scalar(int(d2.num[m2, f[m1]].max()))


def bounded_valency_profile(space: FiniteTernarySpace) -> StepProfile:
    """phi(R) = max over x of #{y : card[x,y] <= R} at realized cards R."""
    card = interval_card_matrix(space)
    table = {}
    for r in np.unique(card):
        table[int(r)] = int((card <= r).sum(axis=1).max())
    return StepProfile(table)


def rips_complex_graph(space: FiniteTernarySpace, C: int) -> GraphSpec:
    if C < 1:
        raise InputError("P_C needs C >= 1")
    card = interval_card_matrix(space)
    n = space.size
    iu = np.triu_indices(n, k=1)
    keep = card[iu] <= C + 1
    edges = list(zip(iu[0][keep].tolist(), iu[1][keep].tolist()))
    return graph_spec(n, edges)


@dataclass(frozen=True)
class QuasiGeodesicReport:
    connected: bool
    fit: QIFit | None
    graph: GraphSpec


def quasi_geodesic_check(space: FiniteTernarySpace, C: int) -> QuasiGeodesicReport:
    g = rips_complex_graph(space, C)
    n = g.vertex_count
    if n == 1:
        from .metrics import MetricMatrix as MM
        one = MM(np.zeros((1, 1), dtype=np.int64))
        return QuasiGeodesicReport(True, quasi_isometry_fit(one, one), g)
    if not g.edges:
        return QuasiGeodesicReport(False, None, g)
    rows, cols = zip(*[(u, v) for u, v in g.edges] + [(v, u) for u, v in g.edges])
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        return QuasiGeodesicReport(False, None, g)
    dpc = MetricMatrix(np.rint(shortest_path(adj, method="D", directed=False,
                                             unweighted=True)).astype(np.int64))
    dmu = induced_metric(space)
    return QuasiGeodesicReport(True, quasi_isometry_fit(dpc, dmu), g)
