"""Rank estimation: exact cube embeddings, interval growth, thin cubes,
multi-median envelopes, rank-1 diagnostics, and cube decompositions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .core import (FiniteTernarySpace, interval, interval_card_matrix,
                   iterated_median, iterated_median_bulk)
from .errors import InputError, InsufficientRangeError, UnsupportedError
from .metrics import MetricMatrix, gromov_delta, induced_metric
from .parallel import map_chunks

DEFAULT_BUDGET = 300_000_000
DEFAULT_SAMPLES = 1_000_000


# ---------------------------------------------------------------- exact rank

def _popcount(x: int) -> int:
    return bin(x).count("1")


def _complete_cube(space, dmu, adj, v, dirs):
    """Grow the cube spanned by v and unit neighbors dirs by completing one
    mask at a time; each new vertex must be adjacent to all its facet
    predecessors and at the right distance from v.  Returns the vertex map
    (list indexed by mask) or None."""
    k = len(dirs)
    m = [None] * (1 << k)
    m[0] = v
    for i, e in enumerate(dirs):
        m[1 << i] = int(e)
    for mask in sorted(range(1 << k), key=_popcount):
        if _popcount(mask) < 2:
            continue
        preds = [m[mask & ~(1 << i)] for i in range(k) if mask & (1 << i)]
        cand = adj[preds[0]].copy()
        for p in preds[1:]:
            cand &= adj[p]
        cand &= dmu.num[v] == _popcount(mask)
        hits = np.nonzero(cand)[0]
        if not hits.size:
            return None
        m[mask] = int(hits[0])
    if len(set(m)) != 1 << k:
        return None
    # verify the map is a median homomorphism over all mask triples
    verts = np.asarray(m, dtype=np.int64)
    masks = np.arange(1 << k)
    p = masks[:, None, None]
    q = masks[None, :, None]
    r = masks[None, None, :]
    maj = (p & q) | (q & r) | (p & r)
    got = space.mu_bulk(verts[p], verts[q], verts[r])
    if np.any(got != verts[maj]):
        return None
    return m


def exact_cube_rank(space: FiniteTernarySpace) -> int:
    """Largest n with an injective median homomorphism of the n-cube.

    Local rule: at each vertex v, directions are unit neighbors; two
    directions are compatible iff they span a square at v (a common
    second neighbor besides v).  Compatible direction cliques are then
    certified by explicit cube completion."""
    if not space.median:
        raise UnsupportedError("exact cube rank needs a flagged-median space; "
                               "use the coarse rank estimators instead")
    n = space.size
    if n == 1:
        return 0
    card = interval_card_matrix(space)
    adj = card == 2
    dmu = induced_metric(space)
    best = 0
    for v in range(n):
        nbrs = np.nonzero(adj[v])[0]
        k = len(nbrs)
        if k == 0:
            continue
        best = max(best, 1)
        sq = np.zeros((k, k), dtype=bool)
        at2 = dmu.num[v] == 2
        for i in range(k):
            for j in range(i + 1, k):
                if np.any(adj[nbrs[i]] & adj[nbrs[j]] & at2):
                    sq[i, j] = sq[j, i] = True
        best = max(best, _best_clique_cube(space, dmu, adj, v, nbrs, sq, best))
    return best


def _best_clique_cube(space, dmu, adj, v, nbrs, sq, floor):
    k = len(nbrs)
    best = floor
    # cliques in the compatibility graph, depth-first, largest first
    def grow(clique, cand):
        nonlocal best
        if len(clique) > best:
            dirs = [nbrs[i] for i in clique]
            if _complete_cube(space, dmu, adj, v, dirs) is not None:
                best = len(clique)
        for idx, i in enumerate(cand):
            rest = [j for j in cand[idx + 1:] if sq[i, j]]
            if len(clique) + 1 + len(rest) > best:
                grow(clique + [i], rest)

    grow([], list(range(k)))
    return best


def cube_rank_bruteforce(space: FiniteTernarySpace, kmax: int = 2,
                         budget: int = 500_000) -> int:
    """Independent slow search used to cross-check exact_cube_rank at small N:
    tries every injective vertex assignment for cubes of dimension <= kmax.
    Dimensions whose assignment count exceeds the budget are skipped."""
    n = space.size
    best = 1 if n >= 2 else 0
    for k in range(2, kmax + 1):
        w = 1 << k
        count = 1
        for i in range(w):
            count *= n - i
        if count > budget or count <= 0:
            break
        masks = np.arange(w)
        p = masks[:, None, None]
        q = masks[None, :, None]
        r = masks[None, None, :]
        maj = (p & q) | (q & r) | (p & r)
        for verts in itertools.permutations(range(n), w):
            va = np.asarray(verts, dtype=np.int64)
            if np.all(space.mu_bulk(va[p], va[q], va[r]) == va[maj]):
                best = max(best, k)
                break
    return best


# ------------------------------------------------------------------- growth

@dataclass(frozen=True)
class GrowthProfile:
    table: dict
    slope: float
    loglog_slope: float
    residual: float
    rank_estimate: int


def _box_model_fit(rs, ys):
    """Fit y = s*log(r/s + 1) + c by least squares over a grid in s.

    This is the exact growth law of interval cardinality in a rank-s box
    (card = prod (r_i+1)), so the fitted s is an unbiased exponent at desk
    scale, unlike the raw log-log slope which is dragged below the true
    rank by the +1 discretization."""
    def sse(s):
        model = s * np.log(rs / s + 1.0)
        resid = ys - model
        resid = resid - resid.mean()
        return float(np.dot(resid, resid))

    grid = np.arange(0.2, 8.0001, 0.01)
    vals = [sse(s) for s in grid]
    s0 = float(grid[int(np.argmin(vals))])
    fine = np.arange(max(0.05, s0 - 0.01), s0 + 0.0101, 0.0005)
    vals = [sse(s) for s in fine]
    sbest = float(fine[int(np.argmin(vals))])
    return sbest, sse(sbest)


def growth_profile(space: FiniteTernarySpace, d: MetricMatrix) -> GrowthProfile:
    n = space.size
    card = interval_card_matrix(space)
    table = {}
    for rnum in np.unique(d.num):
        if rnum == 0:
            continue
        r = d.scalar(rnum)
        table[r] = int(card[d.num == rnum].max())
    if len(table) < 3:
        raise InsufficientRangeError(
            f"only {len(table)} realized distances; need >= 3 to fit growth")
    rs = np.array([float(r) for r in table], dtype=float)
    ys = np.log(np.array([table[r] for r in table], dtype=float))
    slope, res = _box_model_fit(rs, ys)
    # diagnostic: plain log-log least squares over the upper half of the range
    upper = rs >= rs.max() / 2
    lx = np.log(rs[upper])
    ly = ys[upper]
    if len(lx) >= 2 and np.ptp(lx) > 0:
        lls = float(np.polyfit(lx, ly, 1)[0])
    else:
        lls = float("nan")
    return GrowthProfile(table, slope, lls, res, int(round(slope)))


# ---------------------------------------------------------- coarse envelopes

def _distance_to_interval_cube(space, d):
    """dto[x,y,p] = distance from p to [x,y] (numerator scale)."""
    n = space.size
    t3 = space.table3
    dn = d.num
    dto = np.empty((n, n, n), dtype=np.int64)
    for x in range(n):
        block = t3[x]  # block[z, y] = mu(x, z, y)
        for y in range(n):
            mem = np.unique(block[:, y])
            dto[x, y] = dn[:, mem].min(axis=1)
    return dto


@dataclass(frozen=True)
class EnvelopeTable:
    table: dict  # xi -> max m, cumulative (non-decreasing)
    mode: str
    lower_bound: bool

    def at(self, xi):
        out = None
        for k in sorted(self.table):
            if k <= xi:
                out = self.table[k]
        return out


def thin_cubes_envelope(space: FiniteTernarySpace, d: MetricMatrix, n: int,
                        budget: int = DEFAULT_BUDGET,
                        samples: int = DEFAULT_SAMPLES, seed: int = 0,
                        threads: int = 1) -> EnvelopeTable:
    """Over tuples (x_1..x_{n+1}, p, q): xi = max_{i<j} d(p, mu(x_i,x_j,p)),
    m = min_i d(p, mu(x_i,p,q)); table of max m per realized xi."""
    if n < 1:
        raise InputError("thin-cubes condition needs n >= 1")
    N = space.size
    dn = d.num
    t3 = space.table3
    maxd = int(dn.max())
    W = maxd + 1
    tuples = N ** (n + 3)
    if tuples <= budget:
        shape = (N,) * (n + 1)
        grids = np.indices(shape)
        pairs = list(itertools.combinations(range(n + 1), 2))

        def worker(lo, hi):
            flags = np.zeros(W * W, dtype=bool)
            for p in range(lo, hi):
                E = dn[p][t3[:, :, p]]          # E[x,y] = d(p, mu(x,y,p))
                xi = np.zeros(shape, dtype=np.int64)
                for i, j in pairs:
                    np.maximum(xi, E[grids[i], grids[j]], out=xi)
                for q in range(N):
                    A = dn[p][t3[:, p, q]]      # A[x] = d(p, mu(x,p,q))
                    m = A[grids[0]].copy()
                    for i in range(1, n + 1):
                        np.minimum(m, A[grids[i]], out=m)
                    key = xi.ravel() * W + m.ravel()
                    flags[np.bincount(key, minlength=W * W) > 0] = True
            return flags

        flags = map_chunks(N, worker, lambda a, b: a | b,
                           np.zeros(W * W, dtype=bool), threads)
        mode, lower = "exhaustive", False
    else:
        flags = np.zeros(W * W, dtype=bool)
        pairs = list(itertools.combinations(range(n + 1), 2))
        done = 0
        k = n + 3
        while done < samples:
            take = min(100_000, samples - done)
            t = rng.sample_indices(seed, done, take, k, N)
            xs = [t[:, i] for i in range(n + 1)]
            p, q = t[:, n + 1], t[:, n + 2]
            xi = np.zeros(take, dtype=np.int64)
            for i, j in pairs:
                np.maximum(xi, dn[p, t3[xs[i], xs[j], p]], out=xi)
            m = dn[p, t3[xs[0], p, q]]
            for i in range(1, n + 1):
                m = np.minimum(m, dn[p, t3[xs[i], p, q]])
            key = xi * W + m
            flags[np.bincount(key, minlength=W * W) > 0] = True
            done += take
        mode, lower = f"sampled(n={samples},seed={seed})", True

    grid2 = flags.reshape(W, W)
    table = {}
    run = None
    for xi in range(W):
        ms = np.nonzero(grid2[xi])[0]
        if not ms.size:
            continue
        v = int(ms.max())
        run = v if run is None else max(run, v)
        table[d.scalar(xi)] = d.scalar(run)
    return EnvelopeTable(table, mode, lower)


def multi_median_envelope(space: FiniteTernarySpace, d: MetricMatrix, n: int,
                          lam, budget: int = DEFAULT_BUDGET,
                          samples: int = DEFAULT_SAMPLES, seed: int = 0,
                          threads: int = 1):
    """Smallest S with every point lambda-close to all pairwise intervals
    [x_i,x_j] being S-close to some [x_i,q]; returns (S, mode, lower_bound)."""
    if n < 1 or lam < 0:
        raise InputError("multi-median condition needs n >= 1, lambda >= 0")
    N = space.size
    dto = _distance_to_interval_cube(space, d)
    ln = d.radius_num(lam)
    tuples = N ** (n + 2)
    if tuples <= budget:
        def worker(lo, hi):
            worst = 0
            for x1 in range(lo, hi):
                for rest in itertools.product(range(N), repeat=n):
                    xs = (x1,) + rest
                    mask = dto[xs[0], xs[1]] <= ln
                    for i, j in itertools.combinations(range(n + 1), 2):
                        if (i, j) != (0, 1):
                            mask = mask & (dto[xs[i], xs[j]] <= ln)
                    if not mask.any():
                        continue
                    B = dto[xs[0]]
                    for x in xs[1:]:
                        B = np.minimum(B, dto[x])  # (q, p)
                    v = int(B[:, mask].max())
                    if v > worst:
                        worst = v
            return worst

        S = map_chunks(N, worker, max, 0, threads)
        return d.scalar(S), "exhaustive", False
    worst = 0
    done = 0
    k = n + 2
    while done < samples:
        take = min(100_000, samples - done)
        t = rng.sample_indices(seed, done, take, k, N)
        xs = [t[:, i] for i in range(n + 1)]
        q = t[:, n + 1]
        mask = np.ones((take, N), dtype=bool)
        for i, j in itertools.combinations(range(n + 1), 2):
            mask &= dto[xs[i], xs[j]] <= ln
        B = dto[xs[0], q]
        for i in range(1, n + 1):
            B = np.minimum(B, dto[xs[i], q])
        vals = np.where(mask, B, -1).max(axis=1)
        v = int(vals.max())
        if v > worst:
            worst = v
        done += take
    return d.scalar(worst), f"sampled(n={samples},seed={seed})", True


def slim_interval_delta(space: FiniteTernarySpace, d: MetricMatrix):
    """Smallest delta with [a,c] inside the union of the delta-neighborhoods
    of [a,b] and [b,c], over all triples."""
    N = space.size
    t3 = space.table3
    dto = _distance_to_interval_cube(space, d)
    worst = 0
    for a in range(N):
        block = t3[a]
        for c in range(N):
            mem = np.unique(block[:, c])
            v1 = dto[a][:, mem]        # (b, x): d(x, [a,b])
            v2 = dto[:, c, :][:, mem]  # (b, x): d(x, [b,c])
            v = int(np.minimum(v1, v2).max())
            if v > worst:
                worst = v
    return d.scalar(worst)


# ------------------------------------------------------------- coarse cubes

@dataclass(frozen=True)
class CoarseCube:
    dimension: int
    vertices: tuple  # length 2^n, indexed by bitmask
    L: object = None

    def __post_init__(self):
        if len(self.vertices) != 1 << self.dimension:
            raise InputError("cube needs 2^n vertices")


def cube_defect(space: FiniteTernarySpace, d: MetricMatrix,
                cube: CoarseCube):
    """Quasi-morphism defect of the cube map from the median n-cube."""
    verts = np.asarray(cube.vertices, dtype=np.int64)
    if verts.min() < 0 or verts.max() >= space.size:
        raise InputError("cube vertex out of range")
    masks = np.arange(1 << cube.dimension)
    p = masks[:, None, None]
    q = masks[None, :, None]
    r = masks[None, None, :]
    maj = (p & q) | (q & r) | (p & r)
    got = space.mu_bulk(verts[p], verts[q], verts[r])
    return d.scalar(int(d.num[got, verts[maj]].max()))


def measured_cube(space, d, dimension, vertices) -> CoarseCube:
    cube = CoarseCube(dimension, tuple(int(v) for v in vertices))
    return CoarseCube(dimension, cube.vertices, cube_defect(space, d, cube))


@dataclass(frozen=True)
class DecompositionReport:
    phi_defect: object
    psi_phi_defect: object
    phi_psi_defect: object
    sub_phi_defect: object
    sub_psi_phi_defect: object
    sub_phi_psi_defect: object
    L: object
    bound: object


def _decomposition_defects(space, d, v0, v1, axis_points, threads=1):
    """Shared body for the full-cube and subcube decompositions: v1 is the
    top corner, axis_points the per-direction interval endpoints."""
    n = len(axis_points)
    dn = d.num
    A = np.asarray(interval(space, v0, v1).members, dtype=np.int64)
    axes = [np.asarray(interval(space, v0, e).members, dtype=np.int64)
            for e in axis_points]

    def phi(xarr):
        return [space.mu_bulk(v0, xarr, e) for e in axis_points]

    phiA = phi(A)  # list of n arrays over A

    # Phi quasi-morphism defect: source gate median on [v0,v1], target the
    # coordinatewise gate medians on [v0,e_i]; distances in l1.
    na = len(A)
    ii = np.arange(na)
    x = ii[:, None, None]
    y = ii[None, :, None]
    z = ii[None, None, :]
    muA = space.mu_bulk(v0, space.mu_bulk(A[x], A[y], A[z]), v1)
    phi_mu = phi(muA)
    phi_defect = 0
    l1 = np.zeros((na, na, na), dtype=np.int64)
    for i, e in enumerate(axis_points):
        coord = space.mu_bulk(
            v0, space.mu_bulk(phiA[i][x], phiA[i][y], phiA[i][z]), e)
        l1 += dn[coord, phi_mu[i]]
    phi_defect = int(l1.max())

    def psi(cols):
        return space.mu_bulk(iterated_median_bulk(space, cols, v1), v0, v1)

    # Psi o Phi vs identity on A
    back = psi(phiA)
    psi_phi = int(dn[back, A].max())

    # Phi o Psi vs identity on the product of the axis intervals
    grids = np.meshgrid(*axes, indexing="ij")
    cols = [g.ravel() for g in grids]
    down = psi(cols)
    phi_down = phi(down)
    l1 = np.zeros(down.shape, dtype=np.int64)
    for i in range(n):
        l1 += dn[phi_down[i], cols[i]]
    phi_psi = int(l1.max())
    return d.scalar(phi_defect), d.scalar(psi_phi), d.scalar(phi_psi)


def cube_decomposition(space: FiniteTernarySpace, d: MetricMatrix,
                       cube: CoarseCube, subcube_points=None,
                       params=None, threads: int = 1) -> DecompositionReport:
    """Interval product decomposition of [v0,v1] through the cube corners,
    plus the subcube variant for points x_i inside [v0,e_i]."""
    n = cube.dimension
    verts = cube.vertices
    v0, v1 = int(verts[0]), int(verts[-1])
    e = [int(verts[1 << i]) for i in range(n)]
    L = cube_defect(space, d, cube)
    pd, ppd, pxd = _decomposition_defects(space, d, v0, v1, e, threads)
    if subcube_points is None:
        sub_axis = e
    else:
        sub_axis = [int(x) for x in subcube_points]
        for i, x in enumerate(sub_axis):
            if x not in interval(space, v0, e[i]).members:
                raise InputError(f"subcube point {x} is not in [{v0},{e[i]}]")
    xs_top = iterated_median(space, sub_axis, v1)
    spd, sppd, spxd = _decomposition_defects(space, d, v0, xs_top, sub_axis,
                                             threads)
    bound = None
    if params is not None:
        # empirical envelope from measured constants, not a sharp theorem
        # constant: roomy enough to hold for the perturbations we generate,
        # zero exactly in the exact-median case
        base = L
        for v in (params.kappa4, params.kappa5):
            base = base + v
        bound = (n + 2) ** 2 * base
    return DecompositionReport(pd, ppd, pxd, spd, sppd, spxd, L, bound)


# -------------------------------------------------------------- cube search

@dataclass(frozen=True)
class CubeSearchResult:
    cube: CoarseCube | None
    certified: bool
    best_defect: object


def _assignment_metrics(space, d, verts_mat, n):
    """verts_mat: (M, 2^n) assignments; returns (defect, separation) arrays."""
    dn = d.num
    masks = range(1 << n)
    M = verts_mat.shape[0]
    defect = np.zeros(M, dtype=np.int64)
    for p, q, r in itertools.combinations_with_replacement(masks, 3):
        maj = (p & q) | (q & r) | (p & r)
        got = space.mu_bulk(verts_mat[:, p], verts_mat[:, q], verts_mat[:, r])
        np.maximum(defect, dn[got, verts_mat[:, maj]], out=defect)
        # permutations of (p,q,r) give the same median by (M2) when the space
        # has it; for safety on non-symmetric tables, scan all orders
        for pp, qq, rr in itertools.permutations((p, q, r)):
            got = space.mu_bulk(verts_mat[:, pp], verts_mat[:, qq],
                                verts_mat[:, rr])
            np.maximum(defect, dn[got, verts_mat[:, (pp & qq) | (qq & rr) | (pp & rr)]],
                       out=defect)
    sep = None
    for i in range(n):
        s = dn[verts_mat[:, 0], verts_mat[:, 1 << i]]
        sep = s if sep is None else np.minimum(sep, s)
    return defect, sep


def cube_search(space: FiniteTernarySpace, d: MetricMatrix, n: int,
                separation, l_target=0, budget: int = 250_000,
                restarts: int = 48, steps: int = 60,
                seed: int = 0) -> CubeSearchResult:
    if n < 1:
        raise InputError("cube search needs n >= 1")
    N = space.size
    nv = 1 << n
    sep_n = d.radius_num(separation)
    lt_n = d.radius_num(l_target)
    if N ** nv <= budget:
        grids = np.meshgrid(*([np.arange(N)] * nv), indexing="ij")
        verts_mat = np.stack([g.ravel() for g in grids], axis=1)
        defect, sep = _assignment_metrics(space, d, verts_mat, n)
        ok = sep >= sep_n
        if not ok.any():
            return CubeSearchResult(None, True, None)
        cand = np.nonzero(ok)[0]
        best = cand[int(np.argmin(defect[cand]))]
        bd = int(defect[best])
        if bd <= lt_n:
            cube = CoarseCube(n, tuple(int(v) for v in verts_mat[best]),
                              d.scalar(bd))
            return CubeSearchResult(cube, True, d.scalar(bd))
        return CubeSearchResult(None, True, d.scalar(bd))

    # seeded hill climbing with median-completed starts
    far = np.argmax(d.num, axis=1)
    best_assign = None
    best_key = None
    for r in range(restarts):
        start = rng.sample_indices(seed, r, 1, n + 1, N)[0]
        v0 = int(start[0])
        dirs = [int(x) for x in start[1:]]
        t = int(far[v0])
        verts = [0] * nv
        verts[0] = v0
        for i in range(n):
            verts[1 << i] = dirs[i]
        for mask in range(nv):
            pc = _popcount(mask)
            if pc >= 2:
                pts = [verts[1 << i] for i in range(n) if mask & (1 << i)]
                verts[mask] = iterated_median(space, pts, t)
        verts = np.asarray(verts, dtype=np.int64)

        def key_of(vm):
            dfc, sp = _assignment_metrics(space, d, vm[None, :], n)
            return (max(0, sep_n - int(sp[0])), int(dfc[0]))

        cur_key = key_of(verts)
        for _ in range(steps):
            improved = False
            for j in range(nv):
                trial = np.repeat(verts[None, :], N, axis=0)
                trial[:, j] = np.arange(N)
                dfc, sp = _assignment_metrics(space, d, trial, n)
                infeas = np.maximum(0, sep_n - sp)
                order = np.lexsort((np.arange(N), dfc, infeas))
                cand = int(order[0])
                ck = (int(infeas[cand]), int(dfc[cand]))
                if ck < cur_key:
                    verts = trial[cand]
                    cur_key = ck
                    improved = True
            if not improved or cur_key == (0, 0):
                break
        if best_key is None or cur_key < best_key or \
                (cur_key == best_key and tuple(verts) < tuple(best_assign)):
            best_key = cur_key
            best_assign = verts.copy()
        if best_key == (0, 0) and lt_n >= 0:
            break
    if best_key is not None and best_key[0] == 0 and best_key[1] <= lt_n:
        cube = CoarseCube(n, tuple(int(v) for v in best_assign),
                          d.scalar(best_key[1]))
        return CubeSearchResult(cube, False, d.scalar(best_key[1]))
    bd = None if best_key is None or best_key[0] > 0 else d.scalar(best_key[1])
    return CubeSearchResult(None, False, bd)


# ------------------------------------------------------------------ summary

@dataclass
class RankReport:
    exact_cube_rank: int | None
    growth: GrowthProfile | None
    thin_cubes: dict      # n -> EnvelopeTable
    multi_median: dict    # n -> (S, mode, lower_bound)
    slim_interval_delta: object
    gromov_delta: object
    notes: list


def rank_report(space: FiniteTernarySpace, d: MetricMatrix, ns=(1, 2),
                lam=0, budget: int = DEFAULT_BUDGET,
                samples: int = DEFAULT_SAMPLES, seed: int = 0,
                threads: int = 1) -> RankReport:
    notes = []
    ecr = None
    if space.median:
        ecr = exact_cube_rank(space)
    else:
        notes.append("space is not flagged median; exact cube rank skipped")
    try:
        growth = growth_profile(space, d)
    except InsufficientRangeError as exc:
        growth = None
        notes.append(str(exc))
    thin = {n: thin_cubes_envelope(space, d, n, budget=budget, samples=samples,
                                   seed=seed, threads=threads) for n in ns}
    multi = {n: multi_median_envelope(space, d, n, lam, budget=budget,
                                      samples=samples, seed=seed,
                                      threads=threads) for n in ns}
    return RankReport(ecr, growth, thin, multi,
                      slim_interval_delta(space, d), gromov_delta(d), notes)
