"""Morrey-type chaining: polygonal paths, the chord density rho, and Monte Carlo checks of the bounds.

Everything here works in the coordinates of a coordinate subtorus M = T^k (the
``u`` coordinates of :class:`SubtorusSpec`). Segments of length <= 1/2 fit in a ball of
radius <= 1/4 around their midpoint, where the torus is isometric to Euclidean space,
so chords and balls are built in the Euclidean lift and wrapped back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import DivergentIntegralError, InvalidInputError, UnsupportedOperationError
from .projection import restricted_grad_pnorm
from .sampling import SeedSpec, sample_balls, uniforms
from .stats import mean_and_se, pth_root_estimate
from .torus import TOL, SubtorusSpec, TorusPoint, displacement, dist_array, wrap_array
from .zoo import FunctionSpec, restrict

EQUAL = "equal-subdivision"
PAPER = "paper-isosceles"
MODES = {"equal": EQUAL, EQUAL: EQUAL, "paper": PAPER, PAPER: PAPER}


@dataclass(frozen=True)
class PathPolyline:
    vertices: tuple[TorusPoint, ...]
    segment_lengths: tuple[float, ...]
    mode: str
    # Euclidean lift of the vertices, starting at the canonical start point
    lifted: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def segments(self) -> int:
        return len(self.segment_lengths)

    @staticmethod
    def max_segments(k: int) -> int:
        return math.ceil(math.sqrt(k)) + 1


def _resolve_mode(mode: str) -> str:
    try:
        return MODES[mode]
    except KeyError:
        raise InvalidInputError(f"unknown path mode {mode!r}") from None


def _as_array(x) -> np.ndarray:
    return x.array if isinstance(x, TorusPoint) else wrap_array(np.atleast_1d(x))


def _orthogonal_unit(u: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to u: Gram-Schmidt on the first axis not parallel to u."""
    for i in range(u.size):
        e = np.zeros(u.size)
        e[i] = 1.0
        w = e - np.dot(e, u) * u
        nw = np.linalg.norm(w)
        if nw > 1e-9:
            return w / nw
    raise UnsupportedOperationError("no direction orthogonal to the gap in one dimension")


def build_path(x, y, mode: str = EQUAL) -> PathPolyline:
    """Polygonal line from x to y on T^k with every segment of length <= 1/2.

    equal-subdivision: the geodesic cut into max(1, ceil(2d)) equal pieces.
    paper-isosceles: ceil(2d) - 1 geodesic pieces of length exactly 1/2, then the
    remaining gap r is closed by the two legs of an isosceles triangle of height
    sqrt(1/4 - r^2/4), both of length exactly 1/2 (needs k >= 2).
    """
    mode = _resolve_mode(mode)
    a, b = _as_array(x), _as_array(y)
    if a.shape != b.shape:
        raise InvalidInputError("endpoints have different dimensions")
    k = a.size
    delta = displacement(a, b)
    d = float(np.linalg.norm(delta))
    if d == 0.0:
        return PathPolyline((TorusPoint(tuple(a)),), (), mode, a[None].copy())
    u = delta / d
    if mode == EQUAL:
        s = max(1, math.ceil(2 * d))
        lifted = a + np.outer(np.arange(s + 1) / s, delta)
        lifted[-1] = a + delta
    else:
        if k < 2:
            raise UnsupportedOperationError("paper-isosceles paths need k >= 2")
        s = max(0, math.ceil(2 * d) - 1)
        r = d - s / 2
        pts = [a + 0.5 * j * u for j in range(s + 1)]
        h = math.sqrt(max(0.25 - r * r / 4, 0.0))
        apex = pts[-1] + (r / 2) * u + h * _orthogonal_unit(u)
        lifted = np.array(pts + [apex, a + delta])
    verts = wrap_array(lifted)
    lengths = np.linalg.norm(np.diff(lifted, axis=0), axis=1)
    return PathPolyline(tuple(TorusPoint(tuple(v)) for v in verts), tuple(float(x) for x in lengths), mode, lifted)


def path_violations(path: PathPolyline, x, y) -> list[str]:
    """Invariant checks for a path from x to y; empty list when all hold."""
    out = []
    a, b = _as_array(x), _as_array(y)
    k = a.size
    v = np.array([p.array for p in path.vertices])
    if dist_array(v[0], a) > TOL or dist_array(v[-1], b) > TOL:
        out.append("endpoints")
    if len(path.segment_lengths) != len(v) - 1:
        out.append("segment count vs vertices")
    if path.segment_lengths:
        geo = dist_array(v[:-1], v[1:])
        if np.any(np.abs(geo - np.array(path.segment_lengths)) > TOL):
            out.append("recorded lengths")
        if max(path.segment_lengths) > 0.5 + TOL:
            out.append("segment longer than 1/2")
    if path.segments > PathPolyline.max_segments(k):
        out.append("too many segments")
    if path.mode == PAPER and path.segments:
        tail = path.segment_lengths
        if any(abs(t - 0.5) > TOL for t in tail):
            out.append("paper segments not of length 1/2")
    return out


# ---------------------------------------------------------------- constants

def c_alpha_k(alpha: float, k: int) -> float:
    """(1 + alpha)/alpha * k^{1/(2(1+alpha))}."""
    return (1 + alpha) / alpha * k ** (1 / (2 * (1 + alpha)))


def log_ball_volume(dim: int) -> float:
    """log of the volume of the unit Euclidean ball in R^dim: pi^{dim/2} / Gamma(dim/2 + 1)."""
    return dim / 2 * math.log(math.pi) - float(gammaln(dim / 2 + 1))


def _pq(k: int, alpha: float) -> tuple[float, float]:
    if k < 1 or not math.isfinite(alpha):
        raise InvalidInputError("need k >= 1 and a finite alpha")
    p = (1 + alpha) * k
    if p <= k:
        raise DivergentIntegralError("p <= k: the density is not in L^q")
    return p, p / (p - 1)


def density_integral(k: int, alpha: float, *, pi_exponent: Optional[float] = None) -> float:
    """int_{B(0,1)} rho^q = (p-1)/(p-k) * c_k^{q-1}, c_k = 1/V_{k-1}(1) = Gamma((k+1)/2)/pi^{(k-1)/2}.

    ``pi_exponent`` replaces (k-1)/2 in c_k, e.g. k-1 to evaluate the printed variant.
    """
    p, q = _pq(k, alpha)
    e = (k - 1) / 2 if pi_exponent is None else pi_exponent
    log_ck = float(gammaln((k + 1) / 2)) - e * math.log(math.pi)
    return (p - 1) / (p - k) * math.exp((q - 1) * log_ck)


@dataclass(frozen=True)
class DensityNorm:
    value: float
    c_alpha_k: float
    within_bound: bool
    p: float
    q: float


def density_qnorm(k: int, alpha: float) -> DensityNorm:
    """(int rho^q)^{1/q} for the chord density in the unit k-ball, checked against C_{alpha,k}."""
    p, q = _pq(k, alpha)
    value = density_integral(k, alpha) ** (1 / q)
    C = c_alpha_k(alpha, k)
    return DensityNorm(value, C, value <= C, p, q)


@dataclass(frozen=True)
class DensityIdentityCheck:
    """Monte Carlo E_W[rho(W)^{q-1}] against closed forms of int rho^q."""

    estimate: float
    std_error: float
    closed_form: float
    printed_variant: float
    ball_volume_estimate: float

    def _z(self, target: float) -> float:
        diff = self.estimate - target
        if self.std_error > 0:
            return diff / self.std_error
        return 0.0 if math.isclose(diff, 0.0, abs_tol=1e-12 * abs(target)) else math.copysign(math.inf, diff)

    @property
    def z_closed(self) -> float:
        return self._z(self.closed_form)

    @property
    def z_printed(self) -> float:
        return self._z(self.printed_variant)


def density_identity_mc(k: int, alpha: float, samples: int, seed: SeedSpec) -> DensityIdentityCheck:
    """Estimate int rho^q as E[rho(W)^{q-1}] with W drawn from the chord distribution.

    W = (1 - T) x + T Z with x = e_1 and Z uniform in the unit (k-1)-ball orthogonal to
    x. At W the density is 1 / (V_{k-1}(1) T^{k-1}). T is importance sampled, see below. The ball volume is itself estimated
    by hit-or-miss in the cube [-1, 1]^{k-1}, so no Gamma or pi enters the estimate.
    """
    p, q = _pq(k, alpha)
    idx = np.arange(samples)
    dim = k - 1
    if dim == 0:
        vol, vol_rel_var = 1.0, 0.0
    else:
        cube = 2 * uniforms(seed.substream("cube"), dim, idx) - 1
        hits = np.count_nonzero(np.sum(cube * cube, axis=1) <= 1.0)
        frac = hits / samples
        vol = frac * 2 ** dim
        vol_rel_var = (1 - frac) / (frac * samples)
    Z = sample_balls(dim, 1.0, seed.substream("Z"), idx)
    x = np.zeros(k)
    x[0] = 1.0
    Zk = np.concatenate([np.zeros((samples, 1)), Z], axis=1)
    # r^{-gamma} with r uniform has infinite variance once 2 gamma >= 1, so T is drawn
    # from g(t) = (1 - beta) t^{-beta} and reweighted. Any 2 gamma - 1 < beta < gamma keeps
    # the variance finite without making the weight constant.
    gamma_ = (k - 1) * (q - 1)
    beta = max(0.0, 1.5 * gamma_ - 0.5)
    log_t = np.log1p(-uniforms(seed.substream("T"), 1, idx)[:, 0]) / (1 - beta)
    T = np.exp(log_t)
    W = (1 - T)[:, None] * x + T[:, None] * Zk
    # the chord parameter recovered from W must match the one drawn
    r = 1.0 - W[:, 0]
    if np.any(np.linalg.norm(W[:, 1:], axis=1) > r + 1e-12) or not np.allclose(r, T, rtol=0, atol=1e-12):
        raise AssertionError("chord sample outside its cross-section")
    # rho^{q-1} / g in logs, so draws of T below the double range stay finite
    tail = np.exp((beta - gamma_) * log_t) / (1 - beta)
    m, se = mean_and_se(tail)
    est = vol ** (-(q - 1)) * m
    rel = math.sqrt((se / m) ** 2 + (q - 1) ** 2 * vol_rel_var)
    return DensityIdentityCheck(est, est * rel, density_integral(k, alpha),
                                density_integral(k, alpha, pi_exponent=k - 1), vol)


def morrey_bound(k: int, alpha: float, R: float, grad_pnorm_on_ball: float) -> float:
    """4 C_{alpha,k} R^{1 - k/p} (int_{B(0,R)} |grad f|^p)^{1/p}."""
    if not R > 0:
        raise InvalidInputError("R must be positive")
    if grad_pnorm_on_ball < 0:
        raise InvalidInputError("gradient p-norm must be >= 0")
    p, _ = _pq(k, alpha)
    return 4 * c_alpha_k(alpha, k) * R ** (1 - k / p) * grad_pnorm_on_ball


def ball_grad_pnorm(grad_fn, center: np.ndarray, R: float, p: float, samples: int,
                    seed: SeedSpec) -> tuple[float, float]:
    """(int_{B(center,R)} |grad|^p)^{1/p} over a Euclidean ball in chart coordinates (Lebesgue measure)."""
    k = center.size
    pts = center + sample_balls(k, R, seed, np.arange(samples))
    G, smooth = grad_fn(pts)
    powered = np.linalg.norm(G[smooth], axis=-1) ** p
    if powered.size == 0:
        return 0.0, 0.0
    _, _, mean, mean_se = pth_root_estimate(powered, p, seed)
    log_vol = log_ball_volume(k) + k * math.log(R)
    integral = math.exp(log_vol) * mean
    value = integral ** (1 / p)
    se = math.exp(log_vol) * mean_se / (p * value ** (p - 1)) if value > 0 else 0.0
    return value, se


# ---------------------------------------------------------------- chord verification

@dataclass(frozen=True)
class MorreyBoundReport:
    k: int
    alpha: float
    p: float
    R: float
    c_alpha_k: float
    rho_qnorm: float
    bound_value: float
    empirical_lhs: float
    std_error: float
    satisfied: bool
    lhs_x: float = 0.0
    lhs_y: float = 0.0
    se_x: float = 0.0
    se_y: float = 0.0
    half_bound: float = 0.0
    measured: float = 0.0
    ball_pnorm: float = 0.0

    def as_row(self) -> dict:
        return dict(self.__dict__)


def _chart_segment(segment, sub: SubtorusSpec):
    """Endpoints of a segment in subtorus coordinates, as a lifted pair (x, x + displacement)."""
    def coords(p):
        arr = p.array if isinstance(p, TorusPoint) else np.asarray(p, dtype=float)
        if arr.size == sub.ambient_dim and arr.size != sub.k:
            arr = arr[list(sub.free_axes)]
        return wrap_array(arr)

    start, end = (segment.start, segment.end) if hasattr(segment, "start") else segment
    a = coords(start)
    b = a + displacement(a, coords(end))
    return a, b


def mc_chord_verify(f: FunctionSpec, sub: SubtorusSpec, segment, alpha: float, samples: int,
                    seed: SeedSpec, *, pnorm_samples: Optional[int] = None) -> MorreyBoundReport:
    """Monte Carlo check of the chord bound on one segment [x, y] of M.

    Z is uniform in the (k-1)-ball of radius R = |x - y|/2 through the midpoint,
    orthogonal to the segment. Checks E|f(x) - f(Z)| and E|f(y) - f(Z)| against
    2 C_{alpha,k} R^{1-k/p} (int_B |grad_M f|^p)^{1/p} and the measured |f(x) - f(y)|
    against their sum and against the full bound.
    """
    x, y = _chart_segment(segment, sub)
    k = sub.k
    length = float(np.linalg.norm(y - x))
    if length > 0.5 + TOL:
        raise InvalidInputError("segment longer than 1/2 leaves the chart")
    p, _ = _pq(k, alpha)
    C = c_alpha_k(alpha, k)
    rf = restrict(f, sub)
    fx, fy = (float(v) for v in rf.values(np.stack([x, y])))
    measured = abs(fx - fy)
    if length == 0.0:
        return MorreyBoundReport(k, alpha, p, 0.0, C, density_qnorm(k, alpha).value, 0.0, 0.0, 0.0, True)
    R = length / 2
    mid = (x + y) / 2
    u = (y - x) / length
    idx = np.arange(samples)
    if k == 1:
        Z = np.tile(mid, (samples, 1))
    else:
        basis = _orthonormal_complement(u)
        Z = mid + sample_balls(k - 1, R, seed.substream("Z"), idx) @ basis
    fZ = rf.values(Z)
    lhs_x, se_x = mean_and_se(np.abs(fx - fZ))
    lhs_y, se_y = mean_and_se(np.abs(fy - fZ))
    ball, ball_se = ball_grad_pnorm(rf.grads, mid, R, p, pnorm_samples or samples, seed.substream("ball"))
    half = 2 * C * R ** (1 - k / p) * ball
    bound = morrey_bound(k, alpha, R, ball)
    se = math.hypot(se_x, se_y)
    satisfied = (lhs_x <= half + 4 * se_x and lhs_y <= half + 4 * se_y
                 and measured <= lhs_x + lhs_y + 4 * se and lhs_x + lhs_y <= bound + 4 * se)
    return MorreyBoundReport(k, alpha, p, R, C, density_qnorm(k, alpha).value, bound, lhs_x + lhs_y, se,
                             bool(satisfied), lhs_x, lhs_y, se_x, se_y, half, measured, ball)


def _orthonormal_complement(u: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of the hyperplane orthogonal to unit vector u."""
    k = u.size
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(k)]))
    return q[:, 1:k].T


@dataclass(frozen=True)
class ChainedBound:
    bound: float
    per_segment: tuple[float, ...]
    paper_bound: float
    measured: float
    pnorm: float
    pnorm_se: float
    path: PathPolyline

    @property
    def std_error(self) -> float:
        # bound is linear in the estimated p-norm
        return self.bound * self.pnorm_se / self.pnorm if self.pnorm > 0 else 0.0


def chained_osc_bound(f: FunctionSpec, sub: SubtorusSpec, x, y, alpha: float, samples: int,
                      seed: SeedSpec, *, mode: str = EQUAL, pnorm=None) -> ChainedBound:
    """Bound |f(x) - f(y)| for x, y in M by summing the Morrey bound over a path.

    Each segment of length l gets R = l/2 and the ball integral is bounded by the whole
    of M, so bound = sum_j 4 C_{alpha,k} R_j^{alpha/(1+alpha)} (int_M |grad_M f|^p)^{1/p}.
    ``paper_bound`` is 8 (1+alpha)/alpha k (int_M |grad_M f|^p)^{1/p}. A precomputed
    restricted norm may be passed as ``pnorm`` to share it between pairs.
    """
    k = sub.k
    p, _ = _pq(k, alpha)
    a = _as_array(x)
    b = _as_array(y)
    if a.size == sub.ambient_dim and sub.ambient_dim != k:
        a, b = a[list(sub.free_axes)], b[list(sub.free_axes)]
    path = build_path(a, b, mode)
    if pnorm is None:
        pnorm = restricted_grad_pnorm(f, sub, p, samples=samples, seed=seed)
    P = pnorm.value
    per = tuple(morrey_bound(k, alpha, l / 2, P) for l in path.segment_lengths)
    rf = restrict(f, sub)
    fa, fb = rf.values(np.stack([a, b]))
    return ChainedBound(math.fsum(per), per, 8 * (1 + alpha) / alpha * k * P,
                        abs(float(fa) - float(fb)), P, pnorm.std_error, path)
