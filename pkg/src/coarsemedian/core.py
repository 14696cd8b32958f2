"""Finite ternary algebras, intervals, and iterated medians.

A FiniteTernarySpace is a ground set {0..N-1} with a total ternary
operation mu.  Small spaces carry a dense N^3 table (row-major (a,b,c));
larger generator-built spaces carry a vectorized rule plus a memo for
scalar lookups, and can materialize the table when it fits.  Both paths
must answer identically (tested).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, InputError

# dense tables above this entry count are refused; rule-backed access still works
TABLE_ENTRY_LIMIT = 32_000_000

# spaces at or below this size always get a dense table
DENSE_SIZE_LIMIT = 64


class FiniteTernarySpace:
    def __init__(self, size, label="", *, table=None, rule=None, median=False,
                 genspec=None):
        if not isinstance(size, (int, np.integer)) or size <= 0:
            raise InputError("size must be a positive integer")
        if table is None and rule is None:
            raise InputError("need a mu table or a mu rule")
        self.size = int(size)
        self.label = label or f"space({size})"
        self.median = bool(median)
        self.genspec = genspec
        self._rule = rule
        self._memo = {}
        if table is not None:
            table = np.ascontiguousarray(np.asarray(table, dtype=np.int32).ravel())
            if table.shape[0] != self.size ** 3:
                raise InputError("mu table has wrong length")
            if table.min() < 0 or table.max() >= self.size:
                raise InputError("mu table entry out of range")
            self._table = table
        elif self.size <= DENSE_SIZE_LIMIT:
            self._table = self._build_table()
        else:
            self._table = None

    def _build_table(self):
        n = self.size
        if n ** 3 > TABLE_ENTRY_LIMIT:
            raise BudgetError(f"mu table for N={n} exceeds the dense-table budget")
        idx = np.arange(n, dtype=np.int32)
        a = idx[:, None, None]
        b = idx[None, :, None]
        c = idx[None, None, :]
        out = np.ascontiguousarray(
            np.broadcast_to(self._rule(a, b, c), (n, n, n)).astype(np.int32).ravel())
        if out.min() < 0 or out.max() >= n:
            raise InputError("mu rule produced an out-of-range value")
        return out

    @property
    def table(self) -> np.ndarray:
        """Flat int32 table of length N^3, built on demand for rule spaces."""
        if self._table is None:
            self._table = self._build_table()
        return self._table

    @property
    def table3(self) -> np.ndarray:
        return self.table.reshape(self.size, self.size, self.size)

    def _check_index(self, *points):
        for p in points:
            if not 0 <= p < self.size:
                raise InputError(f"point {p} out of range 0..{self.size - 1}")

    def mu(self, a: int, b: int, c: int) -> int:
        a, b, c = int(a), int(b), int(c)
        self._check_index(a, b, c)
        if self._table is not None:
            return int(self._table[(a * self.size + b) * self.size + c])
        key = (a, b, c)
        v = self._memo.get(key)
        if v is None:
            v = int(np.asarray(self._rule(np.int64(a), np.int64(b), np.int64(c))))
            self._memo[key] = v
        return v

    def mu_bulk(self, a, b, c) -> np.ndarray:
        """mu over broadcastable index arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        if self._table is not None:
            n = self.size
            return self._table[(a * n + b) * n + c]
        return np.asarray(self._rule(a, b, c), dtype=np.int64)

    def __repr__(self):
        return f"FiniteTernarySpace({self.size}, {self.label!r})"


@dataclass(frozen=True)
class Interval:
    endpoints: tuple
    members: tuple


class IntervalTable:
    """Memoized (a,b) -> Interval.  Fills are idempotent (values are a pure
    function of the space), so concurrent writes of the same entry are safe."""

    def __init__(self, space: FiniteTernarySpace):
        self.space = space
        self.cache = {}

    def interval(self, a: int, b: int) -> Interval:
        key = (int(a), int(b))
        got = self.cache.get(key)
        if got is None:
            got = interval(self.space, a, b)
            self.cache[key] = got
        return got


def interval(space: FiniteTernarySpace, a: int, b: int) -> Interval:
    """[a,b] = { mu(a,x,b) : x in X }."""
    a, b = int(a), int(b)
    space._check_index(a, b)
    xs = np.arange(space.size, dtype=np.int64)
    members = np.unique(space.mu_bulk(a, xs, b))
    return Interval((a, b), tuple(int(m) for m in members))


def interval_members_matrix(space: FiniteTernarySpace) -> np.ndarray:
    """Boolean (N,N,N) array: memb[a,b,x] iff x in [a,b].  Needs the table."""
    n = space.size
    t3 = space.table3
    memb = np.zeros((n, n, n), dtype=bool)
    rows = np.repeat(np.arange(n), n).reshape(n, n)
    for a in range(n):
        memb[a][rows, t3[a].T] = True  # t3[a].T[b] = mu(a, :, b)
    return memb


def interval_card_matrix(space: FiniteTernarySpace) -> np.ndarray:
    """card[a,b] = number of points in [a,b]."""
    n = space.size
    t3 = space.table3
    card = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        block = t3[a]  # block[x, b] = mu(a, x, b)
        for b in range(n):
            card[a, b] = np.unique(block[:, b]).size
    return card


def iterated_median(space: FiniteTernarySpace, xs, b: int) -> int:
    """mu(x1;b)=x1; mu(x1..x_{k+1};b) = mu(mu(x1..x_k;b), x_{k+1}, b)."""
    xs = list(xs)
    if not xs:
        raise InputError("iterated median needs a non-empty point list")
    acc = int(xs[0])
    space._check_index(acc, int(b))
    for x in xs[1:]:
        acc = space.mu(acc, int(x), int(b))
    return acc


def iterated_median_bulk(space: FiniteTernarySpace, cols, b) -> np.ndarray:
    """Vectorized iterated median: cols is a list of equally shaped index
    arrays [x1, x2, ...], b an array broadcastable to them."""
    if not cols:
        raise InputError("iterated median needs a non-empty point list")
    acc = np.asarray(cols[0], dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    for x in cols[1:]:
        acc = space.mu_bulk(acc, np.asarray(x, dtype=np.int64), b)
    return acc


def permutation_defect(space: FiniteTernarySpace, d, xs, b: int,
                       max_len: int = 6):
    """max over permutations sigma of d(it_med(sigma.xs, b), it_med(xs, b))."""
    xs = [int(x) for x in xs]
    if len(xs) > max_len:
        raise BudgetError(f"|xs|={len(xs)} exceeds the permutation bound {max_len}")
    base = iterated_median(space, xs, b)
    worst = 0
    for perm in itertools.permutations(xs):
        v = d.value(iterated_median(space, list(perm), b), base)
        if v > worst:
            worst = v
    return worst


def absorption_defect(space: FiniteTernarySpace, d, k: int, xs, b: int):
    """d( mu(x1..xk; mu(x1..xn;b)), mu(x1..xk;b) )."""
    xs = [int(x) for x in xs]
    if not 1 <= k <= len(xs):
        raise InputError(f"k={k} out of range 1..{len(xs)}")
    inner = iterated_median(space, xs, b)
    return d.value(iterated_median(space, xs[:k], inner),
                   iterated_median(space, xs[:k], b))
