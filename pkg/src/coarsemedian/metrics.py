"""Exact metric computations.

MetricMatrix stores integer numerators plus one global denominator, so
every distance is an exact rational; all in-scope constructions have
denominator 1 and integer entries.  No floating point enters any value
that a report or test depends on.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .core import FiniteTernarySpace, interval_card_matrix
from .errors import InputError


class MetricMatrix:
    def __init__(self, num, den: int = 1, validate: bool = True):
        num = np.asarray(num, dtype=np.int64)
        if num.ndim != 2 or num.shape[0] != num.shape[1]:
            raise InputError("metric matrix must be square")
        if den < 1:
            raise InputError("denominator must be positive")
        self.num = num
        self.den = int(den)
        self.size = num.shape[0]
        if validate:
            self.validate()

    def validate(self):
        d = self.num
        if np.any(np.diagonal(d) != 0):
            raise InputError("metric has a nonzero diagonal entry")
        if np.any(d != d.T):
            raise InputError("metric is not symmetric")
        if np.any(d < 0):
            raise InputError("metric has a negative entry")
        for k in range(self.size):
            if np.any(d > d[:, k][:, None] + d[k, :][None, :]):
                raise InputError("metric violates the triangle inequality")

    def scalar(self, v):
        """Convert a numerator-scale value to an exact int/Fraction."""
        v = int(v)
        if self.den == 1:
            return v
        f = Fraction(v, self.den)
        return int(f) if f.denominator == 1 else f

    def value(self, i: int, j: int):
        return self.scalar(self.num[int(i), int(j)])

    def radius_num(self, r):
        """Largest numerator-scale integer t with t/den <= r."""
        fr = Fraction(r)
        return (fr.numerator * self.den) // fr.denominator

    def uniformly_discrete(self) -> bool:
        off = self.num[~np.eye(self.size, dtype=bool)]
        return off.size == 0 or int(off.min()) > 0


def metric_from_distances(dist) -> MetricMatrix:
    return MetricMatrix(dist, 1)


def induced_metric(space: FiniteTernarySpace) -> MetricMatrix:
    """d_mu: all-pairs shortest path over the complete graph with edge
    weight card[x,y]-1.  Requires majority vote (T1) and reversal (T2)."""
    n = space.size
    failures = _check_t1_t2(space)
    if failures:
        raise InputError("induced metric needs " + " and ".join(failures))
    card = interval_card_matrix(space)
    weights = (card - 1).astype(np.float64)
    dist = shortest_path(weights, method="D", directed=False)
    out = np.rint(dist).astype(np.int64)
    return MetricMatrix(out, 1)


def _check_t1_t2(space) -> list:
    n = space.size
    idx = np.arange(n, dtype=np.int64)
    a = idx[:, None]
    x = idx[None, :]
    bad = []
    if (np.any(space.mu_bulk(a, a, x) != a) or np.any(space.mu_bulk(a, x, a) != a)):
        bad.append("(T1) majority vote")
    t3a = space.mu_bulk(idx[:, None, None], idx[None, :, None], idx[None, None, :])
    if np.any(t3a != t3a.transpose(2, 1, 0)):
        bad.append("(T2) reversal")
    return bad


def hausdorff(d: MetricMatrix, A, B):
    A = sorted({int(x) for x in A})
    B = sorted({int(x) for x in B})
    if not A or not B:
        raise InputError("Hausdorff distance needs non-empty sets")
    sub = d.num[np.ix_(A, B)]
    return d.scalar(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def neighborhood(d: MetricMatrix, A, R):
    """Closed R-neighborhood of A, as a sorted tuple."""
    A = sorted({int(x) for x in A})
    if not A:
        raise InputError("neighborhood needs a non-empty set")
    rn = d.radius_num(R)
    near = d.num[A, :].min(axis=0) <= rn
    return tuple(int(i) for i in np.nonzero(near)[0])


@dataclass(frozen=True)
class QIFit:
    L: Fraction
    C: int
    L_affine: Fraction
    C_affine: object
    witness: tuple
    witness_affine: tuple


def quasi_isometry_fit(d1: MetricMatrix, d2: MetricMatrix) -> QIFit:
    """Pure-multiplicative fit L = max over pairs of max(d1/d2, d2/d1) with
    C=0 (valid for uniformly discrete metrics), plus an affine fit whose
    slope is the ratio of diameters and whose C' is the max observed slack."""
    if d1.size != d2.size:
        raise InputError("metrics live on different point sets")
    n = d1.size
    if n == 1:
        one = Fraction(1)
        return QIFit(one, 0, one, 0, (0, 0), (0, 0))
    iu = np.triu_indices(n, k=1)
    n1 = d1.num[iu].astype(object)
    n2 = d2.num[iu].astype(object)
    if np.any(n1 == 0) or np.any(n2 == 0):
        raise InputError("quasi-isometry fit needs uniformly discrete metrics")
    # exact argmax of a ratio of integer vectors via cross-multiplication
    def best_ratio(p, q):
        bi = 0
        for i in range(1, len(p)):
            if p[i] * q[bi] > p[bi] * q[i]:
                bi = i
        return bi
    i12 = best_ratio(n1, n2)
    i21 = best_ratio(n2, n1)
    r12 = Fraction(int(n1[i12]) * d2.den, int(n2[i12]) * d1.den)
    r21 = Fraction(int(n2[i21]) * d1.den, int(n1[i21]) * d2.den)
    if r12 >= r21:
        L, wi = r12, i12
    else:
        L, wi = r21, i21
    witness = (int(iu[0][wi]), int(iu[1][wi]))

    dia1 = Fraction(int(max(n1)), d1.den)
    dia2 = Fraction(int(max(n2)), d2.den)
    La = max(dia1 / dia2, dia2 / dia1, Fraction(1))
    slack = Fraction(0)
    wa = witness
    for i in range(len(n1)):
        v1 = Fraction(int(n1[i]), d1.den)
        v2 = Fraction(int(n2[i]), d2.den)
        s = max(v1 - La * v2, v2 - La * v1)
        if s > slack:
            slack = s
            wa = (int(iu[0][i]), int(iu[1][i]))
    Ca = int(slack) if slack.denominator == 1 else slack
    return QIFit(L, 0, La, Ca, witness, wa)


def gromov_delta(d: MetricMatrix):
    """max over 4-tuples of min{(a|b)_p,(b|c)_p} - (a|c)_p, floored at 0.

    Computed on doubled numerators so every Gromov product is an exact
    integer; the result is an exact multiple of 1/(2*den)."""
    n = d.size
    num = d.num
    best = 0
    for p in range(n):
        g2 = num[:, p][:, None] + num[p, :][None, :] - num  # 2*den*(a|b)_p
        for b in range(n):
            lhs = np.minimum(g2[:, b][:, None], g2[b, :][None, :]) - g2
            m = int(lhs.max())
            if m > best:
                best = m
    out = Fraction(best, 2 * d.den)
    return int(out) if out.denominator == 1 else out
