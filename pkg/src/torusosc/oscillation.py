"""Certified two-sided enclosures of Osc(f; M) = sup_M f - inf_M f on coordinate subtori.

Both estimators rest on the Lipschitz covering argument: if every point of M lies within
distance r of an evaluated point, then sup f <= max(evaluated) + L r and
inf f >= min(evaluated) - L r. L is the declared constant of f restricted to M
(``Restricted.lipschitz``), which is zero when f does not depend on the free axes.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceededError, InvalidInputError
from .projection import _lattice_chunks
from .torus import SubtorusSpec, TorusPoint, embed
from .zoo import FunctionSpec, restrict

GRID_BUDGET = 10 ** 7


@dataclass(frozen=True)
class OscCertificate:
    osc_lower: float
    osc_upper: float
    evaluations: int
    mesh: float
    lipschitz_used: float
    argmax: TorusPoint
    argmin: TorusPoint
    sup_bounds: tuple[float, float]
    inf_bounds: tuple[float, float]
    method: str = "grid"
    exhausted: bool = False

    @property
    def gap(self) -> float:
        return self.osc_upper - self.osc_lower

    def as_row(self) -> dict:
        return {
            "method": self.method,
            "osc_lower": self.osc_lower,
            "osc_upper": self.osc_upper,
            "gap": self.gap,
            "evaluations": self.evaluations,
            "mesh": self.mesh,
            "lipschitz_used": self.lipschitz_used,
            "exhausted": self.exhausted,
            "argmax": " ".join(f"{c:.17g}" for c in self.argmax.coords),
            "argmin": " ".join(f"{c:.17g}" for c in self.argmin.coords),
        }


def _lipschitz(f: FunctionSpec, r) -> float:
    L = f.lipschitz_constant
    if L is None or not math.isfinite(L) or L < 0:
        raise InvalidInputError("function carries no usable Lipschitz constant")
    # the restricted constant is read off the family formula, so it is still declared
    return float(r.lipschitz)


def covering_radius(k: int, m: int) -> float:
    """Largest torus distance from a point of T^k to the m^k lattice: half a cell diagonal."""
    return math.sqrt(k) / (2 * m)


def grid_osc(f: FunctionSpec, sub: SubtorusSpec, m: int) -> OscCertificate:
    """Evaluate f on the lattice {j/m}^k of M and enclose the oscillation."""
    k = sub.k
    if m < 2:
        raise InvalidInputError("need at least 2 points per axis")
    if m ** k > GRID_BUDGET:
        raise BudgetExceededError(f"{m}^{k} grid points exceed the budget of {GRID_BUDGET}")
    r = restrict(f, sub)
    L = _lipschitz(f, r)
    axis = np.arange(m) / m
    hi = lo = None
    for chunk in _lattice_chunks(axis, k):
        vals = r.values(chunk)
        i, j = int(np.argmax(vals)), int(np.argmin(vals))
        # lattice order is lexicographic, so the first hit wins ties
        if hi is None or vals[i] > hi[0]:
            hi = (float(vals[i]), chunk[i])
        if lo is None or vals[j] < lo[0]:
            lo = (float(vals[j]), chunk[j])
    rad = covering_radius(k, m)
    osc_lower = hi[0] - lo[0]
    return OscCertificate(
        osc_lower=osc_lower,
        osc_upper=osc_lower + 2 * L * rad,
        evaluations=m ** k,
        mesh=1.0 / m,
        lipschitz_used=L,
        argmax=embed(sub, hi[1]),
        argmin=embed(sub, lo[1]),
        sup_bounds=(hi[0], hi[0] + L * rad),
        inf_bounds=(lo[0] - L * rad, lo[0]),
    )


class _Side:
    """Best-first search for one extremum; sign=+1 for sup, -1 for inf (working on sign*f).

    ``mask`` selects the axes f depends on; the box radius is measured over those only.
    """

    def __init__(self, sign: int, L: float, mask: np.ndarray):
        self.sign, self.L, self.mask = sign, L, mask
        self.heap: list = []
        self.best = -math.inf
        self.best_point: Optional[np.ndarray] = None
        self._ids = 0

    def observe(self, pts: np.ndarray, vals: np.ndarray):
        s = self.sign * vals
        top = s.max()
        cand = pts[s == top]
        order = np.lexsort(cand.T[::-1])
        p = cand[order[0]]
        if top > self.best or (top == self.best and tuple(p) < tuple(self.best_point)):
            self.best, self.best_point = float(top), p

    def push(self, lo, width, val):
        w = width * self.mask
        bound = self.sign * val + self.L * 0.5 * math.sqrt(float(np.dot(w, w)))
        if bound > self.best:
            heapq.heappush(self.heap, (-bound, self._ids, lo, width))
            self._ids += 1

    def upper(self) -> float:
        while self.heap and -self.heap[0][0] <= self.best:
            heapq.heappop(self.heap)
        return max(self.best, -self.heap[0][0]) if self.heap else self.best

    def gap(self) -> float:
        return self.upper() - self.best


def refine_osc(f: FunctionSpec, sub: SubtorusSpec, target_gap: float, budget: int = 200_000, *,
               decide_eps: Optional[float] = None, batch: int = 64) -> OscCertificate:
    """Branch and bound on boxes of the parameter cube [0,1]^k.

    A box with half-diagonal r and center value v holds values in [v - L r, v + L r];
    r is taken over the axes f|_M depends on, and only those axes are split.
    Two searches run side by side (for sup and for inf); each step refines the side
    with the larger gap, splitting its most promising boxes along their widest axis.
    Stops when the enclosure is narrower than ``target_gap``, when ``decide_eps`` is
    decided (upper <= eps or lower > eps), or when ``budget`` evaluations are spent
    (then ``exhausted`` is set).
    """
    if not target_gap > 0:
        raise InvalidInputError("target_gap must be positive")
    k = sub.k
    r = restrict(f, sub)
    L = _lipschitz(f, r)
    mask = np.zeros(k)
    mask[list(r.active_axes)] = 1.0
    sides = (_Side(+1, L, mask), _Side(-1, L, mask))
    root_lo, root_w = np.zeros(k), np.ones(k)
    center = root_lo + root_w / 2
    val = float(r.values(center[None])[0])
    evaluations = 1
    min_width = 1.0
    for s in sides:
        s.observe(center[None], np.array([val]))
        s.push(root_lo, root_w, val)

    def bounds():
        sup_lo, sup_hi = sides[0].best, sides[0].upper()
        inf_hi, inf_lo = -sides[1].best, -sides[1].upper()
        return sup_lo, sup_hi, inf_lo, inf_hi

    exhausted = False
    while True:
        sup_lo, sup_hi, inf_lo, inf_hi = bounds()
        lower, upper = sup_lo - inf_hi, sup_hi - inf_lo
        if upper - lower <= target_gap:
            break
        if decide_eps is not None and (upper <= decide_eps or lower > decide_eps):
            break
        if evaluations + 2 > budget:
            exhausted = True
            break
        side = sides[0] if sides[0].gap() >= sides[1].gap() else sides[1]
        take = min(batch, max(1, (budget - evaluations) // 2))
        boxes = []
        while side.heap and len(boxes) < take:
            neg_bound, _, lo, w = heapq.heappop(side.heap)
            if -neg_bound > side.best:
                boxes.append((lo, w))
        if not boxes:
            continue
        los, ws = [], []
        for lo, w in boxes:
            a = int(np.argmax(w * mask))
            w2 = w.copy()
            w2[a] /= 2
            lo2 = lo.copy()
            lo2[a] += w2[a]
            los += [lo, lo2]
            ws += [w2, w2]
            min_width = min(min_width, float(w2[a]))
        los, ws = np.array(los), np.array(ws)
        centers = los + ws / 2
        vals = r.values(centers)
        evaluations += len(vals)
        for s in sides:
            s.observe(centers, vals)
        for lo, w, v in zip(los, ws, vals):
            side.push(lo, w, float(v))

    sup_lo, sup_hi, inf_lo, inf_hi = bounds()
    return OscCertificate(
        osc_lower=sup_lo - inf_hi,
        osc_upper=sup_hi - inf_lo,
        evaluations=evaluations,
        mesh=min_width,
        lipschitz_used=L,
        argmax=embed(sub, sides[0].best_point),
        argmin=embed(sub, sides[1].best_point),
        sup_bounds=(sup_lo, sup_hi),
        inf_bounds=(inf_lo, inf_hi),
        method="branch-and-bound",
        exhausted=exhausted,
    )


class OscStatus(str, enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class GapPolicy:
    """How hard to try before reporting undecided."""

    m: int = 32
    refine: bool = True
    budget: int = 20_000
    target_gap: float = 1e-6


@dataclass(frozen=True)
class OscDecision:
    status: OscStatus
    certificate: OscCertificate


def classify(cert: OscCertificate, eps: float) -> OscStatus:
    if cert.osc_upper <= eps:
        return OscStatus.SUCCESS
    if cert.osc_lower > eps:
        return OscStatus.FAILURE
    return OscStatus.UNDECIDED


def osc_success_indicator(f: FunctionSpec, sub: SubtorusSpec, eps: float,
                          gap_policy: GapPolicy | None = None) -> OscDecision:
    """Decide Osc(f; M) <= eps from a certificate, reporting undecided rather than guessing."""
    policy = gap_policy or GapPolicy()
    m = policy.m
    while m > 2 and m ** sub.k > GRID_BUDGET:
        m //= 2
    cert = grid_osc(f, sub, m)
    status = classify(cert, eps)
    if status is OscStatus.UNDECIDED and policy.refine:
        refined = refine_osc(f, sub, policy.target_gap, policy.budget, decide_eps=eps)
        status = classify(refined, eps)
        # the grid may still hold the better bound on either side
        if status is OscStatus.UNDECIDED:
            return OscDecision(status, refined if refined.gap < cert.gap else cert)
        cert = refined
    return OscDecision(status, cert)
