"""Space generators: hypercubes, grids, graph medians, random trees,
products, the spiked line, and seeded perturbations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import rng
from .core import FiniteTernarySpace, TABLE_ENTRY_LIMIT
from .errors import BudgetError, InputError
from .metrics import MetricMatrix

SIZE_BUDGET = 4096  # max point count for any generated space


@dataclass(frozen=True)
class GraphSpec:
    vertex_count: int
    edges: frozenset  # of sorted pairs

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise InputError(f"loop edge ({u},{v})")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InputError(f"edge ({u},{v}) out of range")
            if u > v:
                raise InputError("edges must be stored as sorted pairs")


def graph_spec(n: int, edge_list) -> GraphSpec:
    return GraphSpec(n, frozenset((min(u, v), max(u, v)) for u, v in edge_list))


def graph_distances(g: GraphSpec) -> np.ndarray:
    n = g.vertex_count
    if not g.edges:
        if n == 1:
            return np.zeros((1, 1), dtype=np.int64)
        raise InputError("graph is disconnected")
    rows, cols = zip(*[(u, v) for u, v in g.edges] + [(v, u) for u, v in g.edges])
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise InputError("graph is disconnected")
    return np.rint(shortest_path(adj, method="D", directed=False,
                                 unweighted=True)).astype(np.int64)


def graph_path_metric(g: GraphSpec) -> MetricMatrix:
    return MetricMatrix(graph_distances(g), 1)


def _graph_median_table(g: GraphSpec) -> np.ndarray:
    """nu(a,x,b): smallest-index geodesic(a,b) vertex at minimum distance
    to x, evaluated after ordering the endpoint pair so (T2) is exact."""
    n = g.vertex_count
    dist = graph_distances(g)
    if n ** 3 > TABLE_ENTRY_LIMIT:
        raise BudgetError(f"graph median table for N={n} exceeds the budget")
    table = np.empty((n, n, n), dtype=np.int32)  # (a, x, b)
    for a in range(n):
        for b in range(a, n):
            geo = np.nonzero(dist[a] + dist[b] == dist[a, b])[0]  # ascending
            choice = geo[np.argmin(dist[np.ix_(geo, np.arange(n))], axis=0)]
            table[a, :, b] = choice
            table[b, :, a] = choice
    return table.ravel()


def gen_graph_median(g: GraphSpec, label: str = "", median: bool = False,
                     genspec=None) -> FiniteTernarySpace:
    if genspec is None:
        genspec = {"generator": "graph_median",
                   "params": {"n": g.vertex_count,
                              "edges": sorted([list(e) for e in g.edges])}}
    return FiniteTernarySpace(g.vertex_count, label or f"graph_median({g.vertex_count})",
                              table=_graph_median_table(g), median=median,
                              genspec=genspec)


def gen_hypercube(n: int) -> FiniteTernarySpace:
    if not 1 <= n <= 16:
        raise InputError("hypercube dimension must be in 1..16")

    def rule(a, b, c):
        return (a & b) | (b & c) | (a & c)

    return FiniteTernarySpace(2 ** n, f"I^{n}", rule=rule, median=True,
                              genspec={"generator": "hypercube", "params": {"n": n}})


def _grid_codec(dims):
    sizes = [d + 1 for d in dims]
    strides = []
    s = 1
    for size in reversed(sizes):
        strides.append(s)
        s *= size
    strides.reverse()
    return sizes, strides, s


def gen_grid(dims) -> FiniteTernarySpace:
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise InputError("grid dims must be positive integers")
    sizes, strides, total = _grid_codec(dims)
    if total > SIZE_BUDGET:
        raise BudgetError(f"grid with {total} points exceeds the size budget")

    def rule(a, b, c):
        out = 0
        for size, stride in zip(sizes, strides):
            da = (a // stride) % size
            db = (b // stride) % size
            dc = (c // stride) % size
            med = da + db + dc - np.minimum(np.minimum(da, db), dc) \
                - np.maximum(np.maximum(da, db), dc)
            out = out + med * stride
        return out

    return FiniteTernarySpace(total, f"grid{dims}", rule=rule, median=True,
                              genspec={"generator": "grid", "params": {"dims": dims}})


def gen_tree_random(n: int, seed: int) -> FiniteTernarySpace:
    """Random tree: vertex i >= 1 attaches to a seeded uniform parent < i."""
    if n < 1:
        raise InputError("tree size must be >= 1")
    if n > SIZE_BUDGET:
        raise BudgetError("tree size exceeds the budget")
    edges = []
    for i in range(1, n):
        parent = rng.pick_one(seed, i, i)
        edges.append((parent, i))
    g = graph_spec(n, edges)
    return gen_graph_median(
        g, label=f"tree(n={n},seed={seed})", median=True,
        genspec={"generator": "tree", "params": {"n": n, "seed": seed}})


def gen_product(s1: FiniteTernarySpace, s2: FiniteTernarySpace) -> FiniteTernarySpace:
    n1, n2 = s1.size, s2.size
    if n1 * n2 > SIZE_BUDGET:
        raise BudgetError("product size exceeds the budget")

    def rule(a, b, c):
        left = s1.mu_bulk(a // n2, b // n2, c // n2)
        right = s2.mu_bulk(a % n2, b % n2, c % n2)
        return left * n2 + right

    gspec = None
    if s1.genspec is not None and s2.genspec is not None:
        gspec = {"generator": "product",
                 "params": {"a": s1.genspec, "b": s2.genspec}}
    return FiniteTernarySpace(n1 * n2, f"{s1.label}x{s2.label}", rule=rule,
                              median=s1.median and s2.median, genspec=gspec)


def spiked_line_graph(m: int):
    """Tree on the integer segment [-m, m] with a path spike of length |n|
    attached at each integer n.  Returns (GraphSpec, seg_index, leaf_index)
    where seg_index[k] is the vertex for integer k-m and leaf_index maps
    each nonzero integer to its spike tip."""
    if m < 1:
        raise InputError("spiked line needs m >= 1")
    edges = []
    seg = list(range(2 * m + 1))  # vertex i represents integer i - m
    nxt = 2 * m + 1
    leaf = {}
    for i, v in enumerate(seg[:-1]):
        edges.append((v, seg[i + 1]))
    for i, v in enumerate(seg):
        length = abs(i - m)
        prev = v
        for _ in range(length):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        if length:
            leaf[i - m] = prev
    return graph_spec(nxt, edges), seg, leaf


def gen_spiked_line(m: int):
    """(T, X, inclusion): T the spiked tree with graph median; X the
    sub-ternary-algebra on {integers} u {spike tips}; inclusion maps X
    indices into T indices."""
    g, seg, leaf = spiked_line_graph(m)
    T = gen_graph_median(g, label=f"spiked_line_T(m={m})", median=True,
                         genspec={"generator": "spiked_line",
                                  "params": {"m": m, "part": "T"}})
    inclusion = seg + [leaf[k] for k in sorted(leaf)]
    inc = np.asarray(inclusion, dtype=np.int64)
    back = -np.ones(T.size, dtype=np.int64)
    back[inc] = np.arange(len(inc))
    nx = len(inc)
    sub = T.mu_bulk(inc[:, None, None], inc[None, :, None], inc[None, None, :])
    xtab = back[sub]
    if xtab.min() < 0:
        raise InputError("spiked-line point set is not median-closed")
    X = FiniteTernarySpace(nx, f"spiked_line_X(m={m})", table=xtab,
                           median=True,
                           genspec={"generator": "spiked_line",
                                    "params": {"m": m, "part": "X"}})
    return T, X, [int(i) for i in inclusion]


@dataclass(frozen=True)
class PerturbationSpec:
    radius: int
    seed: int

    def __post_init__(self):
        if self.radius < 0:
            raise InputError("perturbation radius must be >= 0")


def perturb(space: FiniteTernarySpace, d: MetricMatrix,
            p: PerturbationSpec) -> FiniteTernarySpace:
    """mu'(a,b,c) = g(mu(a,b,c)) for pairwise distinct arguments, with g a
    seeded displacement of step <= radius; degenerate triples keep their
    exact (M1)/(M2)-forced values.  Requires (M1),(M2) on the input."""
    n = space.size
    if d.size != n:
        raise InputError("metric size does not match the space")
    tbl = space.table3.copy()
    idx = np.arange(n, dtype=np.int64)
    if np.any(space.mu_bulk(idx[:, None], idx[:, None], idx[None, :]) != idx[:, None]):
        raise InputError("perturb requires (M1) on the input space")
    t = space.mu_bulk(idx[:, None, None], idx[None, :, None], idx[None, None, :])
    for perm in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        if np.any(t != t.transpose(perm)):
            raise InputError("perturb requires (M2) on the input space")
    rn = d.radius_num(p.radius)
    words = rng.raw_words(p.seed, 0, n)
    g = np.empty(n, dtype=np.int64)
    for x in range(n):
        cands = np.nonzero(d.num[x] <= rn)[0]
        g[x] = cands[int(words[x] % np.uint64(len(cands)))]
    out = g[tbl]
    a = idx[:, None, None]
    b = idx[None, :, None]
    c = idx[None, None, :]
    degenerate = (a == b) | (b == c) | (a == c)
    out = np.where(degenerate, tbl, out)
    label = f"perturb({space.label},r={p.radius},seed={p.seed})"
    gspec = None
    if space.genspec is not None:
        gspec = {"generator": "perturb",
                 "params": {"base": space.genspec, "radius": p.radius,
                            "seed": p.seed}}
    return FiniteTernarySpace(n, label, table=out, median=False, genspec=gspec)


def reference_metric(space: FiniteTernarySpace) -> MetricMatrix:
    """The natural exact metric for a generated space: Hamming for cubes,
    l1 for grids/products, edge-path for graph-based spaces."""
    spec = space.genspec
    if spec is None:
        raise InputError(f"no reference metric recorded for {space.label}")
    gen = spec["generator"]
    params = spec["params"]
    if gen == "hypercube":
        idx = np.arange(space.size)
        x = idx[:, None] ^ idx[None, :]
        dist = np.zeros_like(x)
        while np.any(x):
            dist += x & 1
            x >>= 1
        return MetricMatrix(dist, 1)
    if gen == "grid":
        sizes, strides, total = _grid_codec(params["dims"])
        idx = np.arange(total)
        dist = np.zeros((total, total), dtype=np.int64)
        for size, stride in zip(sizes, strides):
            coord = (idx // stride) % size
            dist += np.abs(coord[:, None] - coord[None, :])
        return MetricMatrix(dist, 1)
    if gen == "product":
        da = reference_metric(load_genspec(params["a"]))
        db = reference_metric(load_genspec(params["b"]))
        nb = db.size
        ia = np.arange(da.size * nb) // nb
        ib = np.arange(da.size * nb) % nb
        dist = da.num[np.ix_(ia, ia)] + db.num[np.ix_(ib, ib)]
        return MetricMatrix(dist, 1)
    if gen in ("graph_median", "tree"):
        if gen == "tree":
            edges = [(rng.pick_one(params["seed"], i, i), i)
                     for i in range(1, params["n"])]
            g = graph_spec(params["n"], edges)
        else:
            g = graph_spec(params["n"], [tuple(e) for e in params["edges"]])
        return graph_path_metric(g)
    if gen == "spiked_line":
        g, seg, leaf = spiked_line_graph(params["m"])
        full = graph_distances(g)
        if params["part"] == "T":
            return MetricMatrix(full, 1)
        inclusion = seg + [leaf[k] for k in sorted(leaf)]
        sub = full[np.ix_(inclusion, inclusion)]
        return MetricMatrix(sub, 1)
    if gen == "perturb":
        return reference_metric(load_genspec(params["base"]))
    raise InputError(f"unknown generator {gen!r}")


def load_genspec(spec) -> FiniteTernarySpace:
    """Rebuild a space from its {"generator", "params"} description."""
    gen = spec["generator"]
    params = spec["params"]
    if gen == "hypercube":
        return gen_hypercube(params["n"])
    if gen == "grid":
        return gen_grid(params["dims"])
    if gen == "tree":
        return gen_tree_random(params["n"], params["seed"])
    if gen == "graph_median":
        g = graph_spec(params["n"], [tuple(e) for e in params["edges"]])
        return gen_graph_median(g)
    if gen == "product":
        return gen_product(load_genspec(params["a"]), load_genspec(params["b"]))
    if gen == "spiked_line":
        T, X, _ = gen_spiked_line(params["m"])
        return T if params["part"] == "T" else X
    if gen == "perturb":
        base = load_genspec(params["base"])
        d = reference_metric(base)
        return perturb(base, d, PerturbationSpec(params["radius"], params["seed"]))
    raise InputError(f"unknown generator {gen!r}")
