"""Interval structures and the median <-> intervals correspondence.

An IntervalStructure stores interval member sets directly.  Unprimed
structures satisfy the exact symmetry/endpoint axioms and store each
unordered pair once; primed structures may store both orders and carry a
defect radius kappa0 that every construction threads through.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .axioms import StepProfile, check_m1_m2
from .core import FiniteTernarySpace, interval
from .errors import InputError, StructureError
from .metrics import MetricMatrix, hausdorff


class IntervalStructure:
    def __init__(self, size: int, members: dict, primed: bool = False,
                 kappa0: int = 0):
        self.size = int(size)
        self.primed = bool(primed)
        self.kappa0 = kappa0
        self.members = {}
        for (a, b), mem in members.items():
            mem = tuple(sorted({int(x) for x in mem}))
            if not mem:
                raise InputError(f"interval ({a},{b}) is empty")
            if any(not 0 <= x < self.size for x in mem):
                raise InputError(f"interval ({a},{b}) has out-of-range members")
            self.members[(int(a), int(b))] = mem
        for a in range(self.size):
            for b in range(self.size):
                key = (a, b) if (self.primed or a <= b) else (b, a)
                if key not in self.members:
                    raise InputError(f"interval ({a},{b}) is missing")
        if not self.primed:
            for a in range(self.size):
                if self.members[(a, a)] != (a,):
                    raise InputError(f"(I1) fails: [{a},{a}] != {{{a}}}")

    def interval(self, a: int, b: int) -> tuple:
        if self.primed:
            return self.members[(a, b)]
        return self.members[(a, b) if a <= b else (b, a)]

    def member_mask(self) -> np.ndarray:
        """Boolean (N,N,N): mask[a,b,x] iff x in [a,b]."""
        n = self.size
        mask = np.zeros((n, n, n), dtype=bool)
        for a in range(n):
            for b in range(n):
                mask[a, b, list(self.interval(a, b))] = True
        return mask


def intervals_from_median(space: FiniteTernarySpace) -> IntervalStructure:
    res = check_m1_m2(space)
    if not res.passed:
        raise InputError(f"(M1)/(M2) fail at {res.witness}; cannot induce intervals")
    members = {}
    for a in range(space.size):
        for b in range(a, space.size):
            members[(a, b)] = interval(space, a, b).members
    return IntervalStructure(space.size, members, primed=False, kappa0=0)


def _distance_to_interval(istruct: IntervalStructure, d: MetricMatrix) -> np.ndarray:
    """dto[a,b,x] = numerator-scale distance from x to [a,b]."""
    n = istruct.size
    dto = np.empty((n, n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            mem = list(istruct.interval(a, b))
            dto[a, b] = d.num[:, mem].min(axis=1)
    return dto


@dataclass(frozen=True)
class StructureParams:
    phi: StepProfile
    psi: StepProfile


def structure_params(istruct: IntervalStructure, d: MetricMatrix,
                     radii=None) -> StructureParams:
    """phi(R): envelope for [a,c] near [a,b] when c is R-close to [a,b];
    psi(R): diameter bound for triple R-neighborhood intersections.

    Both are evaluated at the given radii (default: all realized
    distances).  An empty triple intersection at the structure's own
    kappa0 radius is a structure error."""
    n = istruct.size
    if d.size != n:
        raise InputError("metric size does not match the structure")
    dto = _distance_to_interval(istruct, d)
    if radii is None:
        radii = sorted({d.scalar(v) for v in np.unique(d.num)})
    radii_num = [(r, d.radius_num(r)) for r in radii]

    # W[a,b,c] = smallest S with [a,c] within S of [a,b]
    W = np.empty((n, n, n), dtype=np.int64)
    for a in range(n):
        for c in range(n):
            mem = list(istruct.interval(a, c))
            W[a, :, c] = dto[a][:, mem].max(axis=1)

    phi_tab = {}
    for r, rn in radii_num:
        sel = W[dto <= rn]  # triples (a,b,c) with c within r of [a,b]
        phi_tab[r] = d.scalar(int(sel.max())) if sel.size else 0

    # psi and the (I3) nonemptiness check
    k0n = d.radius_num(istruct.kappa0)
    psi_tab = {r: 0 for r, _ in radii_num}
    for a in range(n):
        for b in range(a, n):
            near_ab = dto[a, b]
            for c in range(b, n):
                inter_base = np.maximum(np.maximum(near_ab, dto[b, c]), dto[a, c])
                if int(inter_base.min()) > k0n:
                    raise StructureError(
                        f"(I3) fails: empty triple intersection at radius "
                        f"{istruct.kappa0} for ({a},{b},{c})", (a, b, c))
                for r, rn in radii_num:
                    pts = np.nonzero(inter_base <= rn)[0]
                    if pts.size:
                        diam = int(d.num[np.ix_(pts, pts)].max())
                        if diam > d.radius_num(psi_tab[r]):
                            psi_tab[r] = d.scalar(diam)
    return StructureParams(StepProfile(phi_tab), StepProfile(psi_tab))


def median_from_intervals(istruct: IntervalStructure, d: MetricMatrix,
                          kappa0=None) -> FiniteTernarySpace:
    """mu(a,b,c) = smallest-index point of the kappa0-neighborhood triple
    intersection, computed on the sorted triple so (M2) is exact."""
    n = istruct.size
    if d.size != n:
        raise InputError("metric size does not match the structure")
    if kappa0 is None:
        kappa0 = istruct.kappa0
    rn = d.radius_num(kappa0)
    dto = _distance_to_interval(istruct, d)
    table = np.empty((n, n, n), dtype=np.int32)
    for a, b, c in itertools.combinations_with_replacement(range(n), 3):
        inter = np.maximum(np.maximum(dto[a, b], dto[b, c]), dto[a, c]) <= rn
        pts = np.nonzero(inter)[0]
        if not pts.size:
            raise StructureError(
                f"empty triple intersection at radius {kappa0} for ({a},{b},{c})",
                (a, b, c))
        m = int(pts[0])
        for pa, pb, pc in itertools.permutations((a, b, c)):
            table[pa, pb, pc] = m
    return FiniteTernarySpace(n, "induced_median", table=table)


def fatten(istruct: IntervalStructure, kappa0, d: MetricMatrix):
    """[a,b]' = N_k([a,b]) u N_k([b,a]) u {a,b} for a != b; [a,a]' = {a}.
    Returns (unprimed structure, max Hausdorff move)."""
    n = istruct.size
    rn = d.radius_num(kappa0)
    members = {}
    worst = 0
    for a in range(n):
        for b in range(a, n):
            if a == b:
                members[(a, a)] = (a,)
                old = istruct.interval(a, a)
                if set(old) != {a}:
                    worst = max(worst, hausdorff(d, old, (a,)))
                continue
            fwd = list(istruct.interval(a, b))
            bwd = list(istruct.interval(b, a))
            near = np.minimum(d.num[:, fwd].min(axis=1),
                              d.num[:, bwd].min(axis=1)) <= rn
            mem = set(np.nonzero(near)[0].tolist()) | {a, b}
            members[(a, b)] = tuple(sorted(mem))
            h = hausdorff(d, fwd, members[(a, b)])
            worst = max(worst, h)
    return IntervalStructure(n, members, primed=False, kappa0=0), worst


def roundtrip_median_defect(space: FiniteTernarySpace, d: MetricMatrix):
    """median -> intervals -> median: max over triples of d(mu, mu')."""
    istruct = intervals_from_median(space)
    space2 = median_from_intervals(istruct, d, 0)
    return d.scalar(int(d.num[space.table, space2.table].max()))


def roundtrip_interval_defect(istruct: IntervalStructure, d: MetricMatrix,
                              kappa0=None):
    """intervals -> median -> intervals: max over pairs of d_H([x,y],[x,y]')."""
    space = median_from_intervals(istruct, d, kappa0)
    worst = 0
    for a in range(istruct.size):
        for b in range(a, istruct.size):
            new = interval(space, a, b).members
            h = hausdorff(d, istruct.interval(a, b), new)
            if h > worst:
                worst = h
    return worst


def remark_endpoint_check(istruct: IntervalStructure, d: MetricMatrix) -> bool:
    """Both endpoints lie within 3*kappa0 of [a,b], a consequence of the
    primed axioms that we verify directly on accepted structures."""
    rn = 3 * d.radius_num(istruct.kappa0)
    for a in range(istruct.size):
        for b in range(istruct.size):
            mem = list(istruct.interval(a, b))
            if int(d.num[a, mem].min()) > rn or int(d.num[b, mem].min()) > rn:
                return False
    return True
