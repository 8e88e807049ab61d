"""Moments of coordinate projections and restricted gradient norms over random subtori."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceededError, InvalidInputError
from .sampling import SeedSpec, sample_subsets, uniforms
from .stats import pth_root_estimate
from .torus import SubtorusSpec
from .zoo import FunctionSpec, restrict, smooth_gradient_samples

ENUMERATION_BUDGET = 10 ** 7
GRID_BUDGET = 10 ** 7
COMPARE_TOL = 1e-12
_CHUNK = 1 << 16


def lemma4_bound(eps: float, alpha: float, k: int, vnorm: float) -> float:
    """alpha / (8 (1 + alpha)) * eps / k * |v|."""
    return alpha / (8 * (1 + alpha)) * eps / k * vnorm


@dataclass(frozen=True)
class MomentResult:
    value: float
    method: str
    std_error: float
    bound: float
    satisfied: Optional[bool]
    p: float
    k: int
    mean_power: float = math.nan


def _bound_for(v: np.ndarray, k: int, p: float, eps: float, alpha: Optional[float]):
    if alpha is None:
        alpha = p / k - 1.0
    if not (0 < alpha <= 1):
        return math.nan
    return lemma4_bound(eps, alpha, k, float(np.linalg.norm(v)))


def _result(value, method, se, v, k, p, eps, alpha, mean_power) -> MomentResult:
    bound = _bound_for(v, k, p, eps, alpha)
    satisfied = None if math.isnan(bound) else bool(value <= bound + COMPARE_TOL)
    return MomentResult(value, method, se, bound, satisfied, float(p), k, mean_power)


def _check(v, k, p) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if not 1 <= k <= v.size:
        raise InvalidInputError(f"need 1 <= k <= n, got k={k}, n={v.size}")
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    return v


def exact_projection_moment(v, k: int, p: float, *, eps: float = 1.0, alpha: Optional[float] = None) -> MomentResult:
    """(E |P_E v|^p)^{1/p} by enumerating every k-subset of coordinates.

    The bound field uses alpha = p/k - 1 unless given; it is NaN (and ``satisfied`` None)
    when that alpha falls outside (0, 1].
    """
    v = _check(v, k, p)
    n = v.size
    total = math.comb(n, k)
    if total > ENUMERATION_BUDGET:
        raise BudgetExceededError(f"C({n},{k}) = {total} subsets exceeds the enumeration budget; "
                                  "use mc_projection_moment")
    sq = v * v
    combos = itertools.combinations(range(n), k)
    partial = []
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)), dtype=np.int64)
        if block.size == 0:
            break
        s = sq[block.reshape(-1, k)].sum(axis=1)
        partial.append(math.fsum(s ** (p / 2)))
    mean_power = math.fsum(partial) / total
    return _result(mean_power ** (1 / p), "exact-enumeration", 0.0, v, k, p, eps, alpha, mean_power)


def projection_powers(v, k: int, p: float, seed: SeedSpec, indices) -> np.ndarray:
    """|P_E v|^p for the subsets drawn at the given counter indices."""
    v = np.asarray(v, dtype=float)
    J = sample_subsets(v.size, k, seed, indices)
    return (v[J] ** 2).sum(axis=1) ** (p / 2)


def mc_projection_moment(v, k: int, p: float, samples: int, seed: SeedSpec, *,
                         eps: float = 1.0, alpha: Optional[float] = None) -> MomentResult:
    v = _check(v, k, p)
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    powers = np.concatenate([
        projection_powers(v, k, p, seed, np.arange(lo, min(lo + _CHUNK, samples)))
        for lo in range(0, samples, _CHUNK)
    ])
    value, se, mean_power, _ = pth_root_estimate(powers, p, seed)
    return _result(value, "monte-carlo", se, v, k, p, eps, alpha, mean_power)


@dataclass(frozen=True)
class RestrictedNorm:
    value: float
    std_error: float
    mean_power: float
    mean_power_se: float
    evaluations: int
    skipped: int
    method: str


def restricted_grad_pnorm(f: FunctionSpec, sub: SubtorusSpec, p: float, *, quadrature: str = "monte-carlo",
                          m: int = 32, samples: int = 10_000, seed: SeedSpec | None = None) -> RestrictedNorm:
    """(int_M |grad_M f|^p)^{1/p} over a coordinate subtorus M (unit volume).

    ``quadrature="grid"`` uses the cell-centred m^k lattice (non-smooth lattice points
    are dropped and counted); ``"monte-carlo"`` draws uniform points of M and resamples
    non-smooth ones.
    """
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    r = restrict(f, sub)
    k = sub.k
    if quadrature == "grid":
        if m < 1 or m ** k > GRID_BUDGET:
            raise BudgetExceededError(f"grid of {m}^{k} points exceeds the budget")
        axis = (np.arange(m) + 0.5) / m
        parts, skipped = [], 0
        for chunk in _lattice_chunks(axis, k):
            G, smooth = r.grads(chunk)
            skipped += int(np.count_nonzero(~smooth))
            parts.append(np.linalg.norm(G[smooth], axis=-1) ** p)
        powered = np.concatenate(parts)
        if powered.size == 0:
            raise BudgetExceededError("no smooth lattice points")
        mean_power = math.fsum(powered) / powered.size
        return RestrictedNorm(mean_power ** (1 / p), 0.0, mean_power, 0.0, m ** k, skipped, "grid")
    if quadrature != "monte-carlo":
        raise InvalidInputError(f"unknown quadrature {quadrature!r}")
    seed = seed or SeedSpec(0)
    G, skipped = smooth_gradient_samples(r.grads, lambda idx: uniforms(seed, k, idx), samples, _CHUNK)
    powered = np.linalg.norm(G, axis=-1) ** p
    value, se, mean_power, mean_se = pth_root_estimate(powered, p, seed)
    return RestrictedNorm(value, se, mean_power, mean_se, samples + skipped, skipped, "monte-carlo")


def _lattice_chunks(axis: np.ndarray, k: int, chunk: int = 1 << 18):
    m = axis.size
    total = m ** k
    for lo in range(0, total, chunk):
        flat = np.arange(lo, min(lo + chunk, total))
        idx = np.stack(np.unravel_index(flat, (m,) * k), axis=-1)
        yield axis[idx]


def split_bound(v, k: int, p: float, delta: float, n: int | None = None) -> float:
    """2k/(delta^2 n) + (k delta^2)^{p/2}: the two-event split of E|P_E v|^p for unit v."""
    n = np.asarray(v).size if n is None else n
    return 2 * k / (delta ** 2 * n) + (k * delta ** 2) ** (p / 2)
