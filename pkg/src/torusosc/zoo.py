"""Catalog of locally-Lipschitz test functions on T^n.

Families
--------
dist-to-point        f(x) = dist(x, x0)                                     L = 1
coordinate-sawtooth  f(x) = dist_T1(x_i, 0)                                 L = 1
max-sawtooth         f(x) = max_{i in A} dist_T1(x_i, 0)                    L = 1
trig-poly            f(x) = sum_j a_j sin(2 pi m_j . x + phi_j)             L = sum_j 2 pi |a_j| |m_j|
smoothed-distance    f(x) = A (sqrt(c^2 + sum_i s_i(x)^2) - c),
                     s_i(x) = sin(pi (x_i - x0_i)) / pi                     L = A

Every family has an analytic gradient. Points where the gradient does not exist
(kinks, ties, the cut locus of x0) are detected within ``KINK_TOL`` and reported as
non-smooth; Monte Carlo integrators resample them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np

from .errors import (
    BudgetExceededError,
    InvalidInputError,
    NonDifferentiablePointError,
    UnsupportedOperationError,
)
from .sampling import SeedSpec, sample_subsets, uniforms
from .stats import pth_root_estimate
from .torus import SubtorusSpec, TorusPoint, displacement, wrap_array

KINK_TOL = 1e-9
FD_STEP = 1e-6
OVERSAMPLE_CAP = 10
NORMALIZE_MARGIN = 0.99

FAMILIES = ("dist-to-point", "coordinate-sawtooth", "max-sawtooth", "trig-poly", "smoothed-distance")
ALIASES = {
    "a": "dist-to-point", "dist": "dist-to-point",
    "b": "coordinate-sawtooth", "sawtooth": "coordinate-sawtooth",
    "c": "max-sawtooth",
    "d": "trig-poly", "trig": "trig-poly",
    "e": "smoothed-distance", "smoothed": "smoothed-distance",
}
SCALABLE = ("trig-poly", "smoothed-distance")

_PARAM_KEYS = {
    "dist-to-point": {"x0"},
    "coordinate-sawtooth": {"axis"},
    "max-sawtooth": {"axes"},
    "trig-poly": {"amplitudes", "frequencies", "phases"},
    "smoothed-distance": {"x0", "smoothing", "amplitude"},
}


def canonical_family(family: str) -> str:
    fam = ALIASES.get(family, family)
    if fam not in FAMILIES:
        raise InvalidInputError(f"unknown function family {family!r}; known: {', '.join(FAMILIES)}")
    return fam


@dataclass(frozen=True)
class FunctionSpec:
    family: str
    params: Mapping[str, Any]
    ambient_dim: int
    lipschitz_constant: float
    has_analytic_gradient: bool = True
    _arrays: dict = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.ambient_dim

    def to_record(self) -> dict:
        return {
            "family": self.family,
            "ambient_dim": self.ambient_dim,
            "params": _plain(dict(self.params)),
            "lipschitz_constant": self.lipschitz_constant,
            "has_analytic_gradient": self.has_analytic_gradient,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def _plain(obj):
    if isinstance(obj, Mapping):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _freeze(obj):
    if isinstance(obj, Mapping):
        return MappingProxyType({k: _freeze(v) for k, v in obj.items()})
    if isinstance(obj, (list, tuple, np.ndarray)):
        return tuple(_freeze(v) for v in obj)
    return obj


def zoo_construct(family: str, params: Mapping[str, Any] | None, n: int, *, analytic_gradient: bool = True) -> FunctionSpec:
    """Build and validate a zoo function on T^n.

    ``analytic_gradient=False`` forces finite-difference gradients (used to exercise the
    estimator fallback). For trig-poly, ``unit_lipschitz=True`` rescales the amplitudes so
    that the declared Lipschitz constant is exactly 1.
    """
    fam = canonical_family(family)
    params = dict(params or {})
    n = int(n)
    if n < 1:
        raise InvalidInputError("ambient dimension must be >= 1")
    unit = bool(params.pop("unit_lipschitz", False))
    extra = set(params) - _PARAM_KEYS[fam]
    if extra:
        raise InvalidInputError(f"unexpected parameters for {fam}: {sorted(extra)}")

    arrays: dict[str, np.ndarray] = {}
    if fam in ("dist-to-point", "smoothed-distance"):
        x0 = params.get("x0", "origin")
        x0 = np.zeros(n) if isinstance(x0, str) and x0 == "origin" else np.asarray(x0, dtype=float)
        if x0.shape != (n,):
            raise InvalidInputError(f"x0 must have dimension {n}")
        x0 = wrap_array(x0)
        params["x0"] = [float(v) for v in x0]
        arrays["x0"] = x0
        L = 1.0
        if fam == "smoothed-distance":
            c = float(params.get("smoothing", 0.05))
            A = float(params.get("amplitude", 1.0))
            if not c > 0 or not A >= 0 or not math.isfinite(A):
                raise InvalidInputError("smoothing must be > 0 and amplitude >= 0")
            params["smoothing"], params["amplitude"] = c, A
            L = A
    elif fam == "coordinate-sawtooth":
        axis = int(params.get("axis", 0))
        if not 0 <= axis < n:
            raise InvalidInputError(f"axis {axis} out of range for n={n}")
        params["axis"] = axis
        L = 1.0
    elif fam == "max-sawtooth":
        axes = sorted({int(a) for a in params.get("axes", [])})
        if not axes or axes[0] < 0 or axes[-1] >= n:
            raise InvalidInputError("max-sawtooth needs a nonempty set of axes in range")
        params["axes"] = axes
        arrays["axes"] = np.array(axes)
        L = 1.0
    else:
        amps = np.atleast_1d(np.asarray(params.get("amplitudes", []), dtype=float))
        freqs = np.asarray(params.get("frequencies", []), dtype=float).reshape(len(amps), -1) if len(amps) else np.zeros((0, n))
        phases = np.atleast_1d(np.asarray(params.get("phases", np.zeros(len(amps))), dtype=float))
        if freqs.shape != (len(amps), n) or phases.shape != amps.shape:
            raise InvalidInputError("trig-poly needs one length-n frequency vector and one phase per amplitude")
        if not np.all(freqs == np.round(freqs)):
            raise InvalidInputError("trig-poly frequencies must be integer vectors")
        if np.any(~freqs.any(axis=1)):
            raise InvalidInputError("trig-poly frequency vectors must be nonzero")
        if not (np.all(np.isfinite(amps)) and np.all(np.isfinite(phases))):
            raise InvalidInputError("non-finite trig-poly coefficients")
        L = float(np.sum(2 * np.pi * np.abs(amps) * np.linalg.norm(freqs, axis=1)))
        if unit and L > 0:
            amps = amps / L
            L = float(np.sum(2 * np.pi * np.abs(amps) * np.linalg.norm(freqs, axis=1)))
        params = {"amplitudes": [float(a) for a in amps],
                  "frequencies": [[int(v) for v in row] for row in freqs],
                  "phases": [float(ph) for ph in phases]}
        arrays.update(amplitudes=amps, frequencies=freqs, phases=phases)

    return FunctionSpec(fam, _freeze(params), n, L, bool(analytic_gradient), arrays)


def constant(n: int) -> FunctionSpec:
    """The zero function, as a trig-poly with no terms."""
    return zoo_construct("trig-poly", {"amplitudes": [], "frequencies": [], "phases": []}, n)


def from_record(record: Mapping[str, Any]) -> FunctionSpec:
    allowed = {"family", "ambient_dim", "params", "lipschitz_constant", "has_analytic_gradient"}
    extra = set(record) - allowed
    if extra:
        raise InvalidInputError(f"unknown keys in function record: {sorted(extra)}")
    try:
        f = zoo_construct(record["family"], record.get("params", {}), record["ambient_dim"],
                          analytic_gradient=record.get("has_analytic_gradient", True))
    except KeyError as exc:
        raise InvalidInputError(f"function record missing {exc}") from None
    declared = record.get("lipschitz_constant")
    if declared is not None and not math.isclose(declared, f.lipschitz_constant, rel_tol=1e-12, abs_tol=1e-15):
        raise InvalidInputError("declared lipschitz_constant does not match the family parameters")
    return f


def from_json(text: str) -> FunctionSpec:
    return from_record(json.loads(text))


def scaled(f: FunctionSpec, factor: float) -> FunctionSpec:
    """``factor * f`` for the scalable families."""
    if f.family not in SCALABLE:
        raise UnsupportedOperationError(f"family {f.family} cannot be rescaled")
    if not factor >= 0:
        raise InvalidInputError("scale factor must be >= 0")
    params = _plain(dict(f.params))
    if f.family == "trig-poly":
        params["amplitudes"] = [a * factor for a in params["amplitudes"]]
    else:
        params["amplitude"] = params["amplitude"] * factor
    return zoo_construct(f.family, params, f.n, analytic_gradient=f.has_analytic_gradient)


def from_template(family: str, params: Mapping[str, Any] | None, n: int) -> FunctionSpec:
    """Instantiate a dimension-free template at dimension ``n``.

    Besides the plain family parameters, trig-poly accepts a random template
    ``{"random_terms": T, "support": s, "max_freq": F, "seed": S}``: T terms whose
    frequency vectors have s nonzero entries in {+-1..+-F} on uniformly chosen axes,
    unit amplitudes, uniform phases, then rescaled to Lipschitz constant 1.
    ``x0 = "random"`` draws a uniform center from ``seed``.
    """
    fam = canonical_family(family)
    params = dict(params or {})
    seed = SeedSpec(int(params.pop("seed", 0)), stream_id=n)
    if params.get("x0") == "random":
        params["x0"] = uniforms(seed.substream("x0"), n)[0]
    if fam == "trig-poly" and "random_terms" in params:
        terms = int(params.pop("random_terms"))
        support = min(int(params.pop("support", 1)), n)
        max_freq = int(params.pop("max_freq", 1))
        idx = np.arange(terms)
        axes = sample_subsets(n, support, seed.substream("axes"), idx)
        u = uniforms(seed.substream("coef"), 2 * support + 1, idx)
        freqs = np.zeros((terms, n), dtype=int)
        mags = 1 + np.minimum((u[:, :support] * max_freq).astype(int), max_freq - 1)
        signs = np.where(u[:, support:2 * support] < 0.5, -1, 1)
        np.put_along_axis(freqs, axes, mags * signs, axis=1)
        params = {"amplitudes": np.ones(terms), "frequencies": freqs,
                  "phases": 2 * np.pi * u[:, -1], "unit_lipschitz": params.pop("unit_lipschitz", True)}
    return zoo_construct(fam, params, n)


# ---------------------------------------------------------------- evaluation

def _saw(t):
    return np.minimum(t, 1.0 - t)


def _saw_grad(t):
    g = np.where(t < 0.5, 1.0, -1.0)
    kink = (t < KINK_TOL) | (t > 1.0 - KINK_TOL) | (np.abs(t - 0.5) < KINK_TOL)
    return g, ~kink


def _as_points(f: FunctionSpec, X) -> np.ndarray:
    X = np.asarray(X.array if isinstance(X, TorusPoint) else X, dtype=float)
    if X.shape[-1:] != (f.n,):
        raise InvalidInputError(f"expected points of dimension {f.n}, got shape {X.shape}")
    return X


def evaluate(f: FunctionSpec, X) -> np.ndarray:
    """Vectorized evaluation on points of shape (..., n)."""
    X = wrap_array(_as_points(f, X))
    a, p = f._arrays, f.params
    if f.family == "dist-to-point":
        return np.linalg.norm(displacement(a["x0"], X), axis=-1)
    if f.family == "coordinate-sawtooth":
        return _saw(X[..., p["axis"]])
    if f.family == "max-sawtooth":
        return _saw(X[..., a["axes"]]).max(axis=-1)
    if f.family == "trig-poly":
        if a["amplitudes"].size == 0:
            return np.zeros(X.shape[:-1])
        return np.sin(2 * np.pi * (X @ a["frequencies"].T) + a["phases"]) @ a["amplitudes"]
    s = np.sin(np.pi * (X - a["x0"])) / np.pi
    c = p["smoothing"]
    return p["amplitude"] * (np.sqrt(c * c + np.sum(s * s, axis=-1)) - c)


def _analytic_gradient(f: FunctionSpec, X) -> tuple[np.ndarray, np.ndarray]:
    a, p = f._arrays, f.params
    G = np.zeros(X.shape)
    smooth = np.ones(X.shape[:-1], dtype=bool)
    if f.family == "dist-to-point":
        d = displacement(a["x0"], X)
        r = np.linalg.norm(d, axis=-1)
        smooth = (r > KINK_TOL) & np.all(np.abs(d) < 0.5 - KINK_TOL, axis=-1)
        G = d / np.where(smooth, r, 1.0)[..., None]
    elif f.family == "coordinate-sawtooth":
        g, smooth = _saw_grad(X[..., p["axis"]])
        G[..., p["axis"]] = g
    elif f.family == "max-sawtooth":
        axes = a["axes"]
        vals = _saw(X[..., axes])
        order = np.argsort(-vals, axis=-1, kind="stable")
        top = np.take_along_axis(vals, order[..., :1], axis=-1)[..., 0]
        arg = order[..., 0]
        t = np.take_along_axis(X[..., axes], order[..., :1], axis=-1)[..., 0]
        g, smooth = _saw_grad(t)
        if len(axes) > 1:
            second = np.take_along_axis(vals, order[..., 1:2], axis=-1)[..., 0]
            smooth &= top - second > KINK_TOL
        np.put_along_axis(G, axes[arg][..., None], g[..., None], axis=-1)
    elif f.family == "trig-poly":
        if a["amplitudes"].size:
            w = np.cos(2 * np.pi * (X @ a["frequencies"].T) + a["phases"]) * (2 * np.pi * a["amplitudes"])
            G = w @ a["frequencies"]
    else:
        delta = X - a["x0"]
        s = np.sin(np.pi * delta) / np.pi
        c = p["smoothing"]
        root = np.sqrt(c * c + np.sum(s * s, axis=-1))
        G = p["amplitude"] * s * np.cos(np.pi * delta) / root[..., None]
    return G, smooth


def _fd_gradient(f: FunctionSpec, X, step: float = FD_STEP) -> np.ndarray:
    eye = np.eye(f.n) * step
    plus = evaluate(f, X[..., None, :] + eye)
    minus = evaluate(f, X[..., None, :] - eye)
    return (plus - minus) / (2 * step)


def gradient(f: FunctionSpec, X, *, method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Gradients at points (..., n) and a mask of points where f is differentiable.

    Finite differences (central, step 1e-6) are used for ``method="fd"`` or when the
    function has no analytic gradient; the smoothness mask still comes from the family.
    """
    X = wrap_array(_as_points(f, X))
    G, smooth = _analytic_gradient(f, X)
    if method == "fd" or (method == "auto" and not f.has_analytic_gradient):
        G = _fd_gradient(f, X)
    elif method not in ("auto", "analytic"):
        raise InvalidInputError(f"unknown gradient method {method!r}")
    return G, smooth


def zoo_eval(f: FunctionSpec, x) -> float:
    return float(evaluate(f, _as_points(f, x)))


def zoo_grad(f: FunctionSpec, x, *, method: str = "auto") -> np.ndarray:
    X = _as_points(f, x)
    if X.ndim != 1:
        raise InvalidInputError("zoo_grad takes a single point; use gradient() for batches")
    G, smooth = gradient(f, X, method=method)
    if not smooth:
        raise NonDifferentiablePointError(f"{f.family} is not differentiable at {tuple(X)}")
    return G


# ---------------------------------------------------------------- restriction to a subtorus

class Restricted:
    """``f`` restricted to a coordinate subtorus, evaluated in subtorus coordinates.

    Values and gradients of f|_M are computed from the free coordinates only, with the
    contribution of the fixed coordinates precomputed once. This keeps grid and Monte
    Carlo work proportional to k rather than n.
    """

    def __init__(self, f: FunctionSpec, sub: SubtorusSpec):
        if sub.ambient_dim != f.n:
            raise InvalidInputError("subtorus and function live in different dimensions")
        self.f, self.sub = f, sub
        self.k = sub.k
        J = np.array(sub.free_axes)
        base = sub.base.array
        fixed = np.array(sub.fixed_axes, dtype=int)
        a, p = f._arrays, f.params
        self._J = J
        if f.family in ("dist-to-point", "smoothed-distance"):
            self._x0 = a["x0"][J]
            if f.family == "dist-to-point":
                self._const = float(np.sum(displacement(a["x0"][fixed], base[fixed]) ** 2))
            else:
                self._const = float(np.sum((np.sin(np.pi * (base[fixed] - a["x0"][fixed])) / np.pi) ** 2))
        elif f.family == "coordinate-sawtooth":
            hits = np.flatnonzero(J == p["axis"])
            self._pos = int(hits[0]) if hits.size else None
            self._const = float(_saw(base[p["axis"]]))
        elif f.family == "max-sawtooth":
            axes = a["axes"]
            free = np.isin(axes, J)
            self._pos = np.searchsorted(J, axes[free])
            fixed_vals = _saw(base[axes[~free]])
            self._const = float(fixed_vals.max()) if fixed_vals.size else None
        else:
            F = a["frequencies"]
            self._F = F[:, J] if F.size else np.zeros((0, self.k))
            self._phase = (2 * np.pi * (F[:, fixed] @ base[fixed]) + a["phases"]) if F.size else np.zeros(0)

    @property
    def lipschitz(self) -> float:
        """Declared Lipschitz constant of f|_M; never larger than the global one.

        Follows from the family formulas: only free coordinates can move the value.
        """
        f, p = self.f, self.f.params
        if f.family == "coordinate-sawtooth":
            L = 1.0 if self._pos is not None else 0.0
        elif f.family == "max-sawtooth":
            L = 1.0 if self._pos.size else 0.0
        elif f.family == "trig-poly":
            amps = f._arrays["amplitudes"]
            L = float(np.sum(2 * np.pi * np.abs(amps) * np.linalg.norm(self._F, axis=1))) if amps.size else 0.0
        else:
            L = f.lipschitz_constant
        return min(L, f.lipschitz_constant)

    @property
    def active_axes(self) -> tuple[int, ...]:
        """Subtorus coordinates that f|_M can depend on; f|_M is constant along the others."""
        f = self.f
        if f.family == "coordinate-sawtooth":
            return () if self._pos is None else (self._pos,)
        if f.family == "max-sawtooth":
            return tuple(int(i) for i in np.unique(self._pos))
        if f.family == "trig-poly":
            if self._F.shape[0] == 0:
                return ()
            return tuple(int(i) for i in np.flatnonzero(np.any(self._F != 0, axis=0)))
        return tuple(range(self.k))

    def to_ambient(self, U) -> np.ndarray:
        return self.sub.embed_array(U)

    def values(self, U) -> np.ndarray:
        U = wrap_array(U)
        f, p = self.f, self.f.params
        if f.family == "dist-to-point":
            return np.sqrt(self._const + np.sum(displacement(self._x0, U) ** 2, axis=-1))
        if f.family == "coordinate-sawtooth":
            if self._pos is None:
                return np.full(U.shape[:-1], self._const)
            return _saw(U[..., self._pos])
        if f.family == "max-sawtooth":
            parts = _saw(U[..., self._pos]) if self._pos.size else np.full(U.shape[:-1] + (0,), 0.0)
            if self._const is not None:
                parts = np.concatenate([parts, np.full(U.shape[:-1] + (1,), self._const)], axis=-1)
            return parts.max(axis=-1)
        if f.family == "trig-poly":
            if self._F.shape[0] == 0:
                return np.zeros(U.shape[:-1])
            return np.sin(2 * np.pi * (U @ self._F.T) + self._phase) @ f._arrays["amplitudes"]
        s = np.sin(np.pi * (U - self._x0)) / np.pi
        c = p["smoothing"]
        return p["amplitude"] * (np.sqrt(c * c + self._const + np.sum(s * s, axis=-1)) - c)

    def grads(self, U) -> tuple[np.ndarray, np.ndarray]:
        """Gradient of f|_M (the free components of grad f) and the smoothness mask."""
        U = wrap_array(U)
        f, p = self.f, self.f.params
        G = np.zeros(U.shape)
        smooth = np.ones(U.shape[:-1], dtype=bool)
        if f.family == "dist-to-point":
            d = displacement(self._x0, U)
            r = np.sqrt(self._const + np.sum(d * d, axis=-1))
            smooth = (r > KINK_TOL) & np.all(np.abs(d) < 0.5 - KINK_TOL, axis=-1)
            G = d / np.where(smooth, r, 1.0)[..., None]
        elif f.family == "coordinate-sawtooth":
            if self._pos is not None:
                g, smooth = _saw_grad(U[..., self._pos])
                G[..., self._pos] = g
        elif f.family == "max-sawtooth":
            vals = _saw(U[..., self._pos])
            cols = self._pos
            if self._const is not None:
                vals = np.concatenate([vals, np.full(U.shape[:-1] + (1,), self._const)], axis=-1)
            order = np.argsort(-vals, axis=-1, kind="stable")
            arg = order[..., 0]
            top = np.take_along_axis(vals, order[..., :1], axis=-1)[..., 0]
            if vals.shape[-1] > 1:
                second = np.take_along_axis(vals, order[..., 1:2], axis=-1)[..., 0]
                smooth = top - second > KINK_TOL
            is_free = arg < cols.size
            if cols.size:
                col = cols[np.minimum(arg, cols.size - 1)]
                t = np.take_along_axis(U, col[..., None], axis=-1)[..., 0]
                g, ok = _saw_grad(t)
                smooth &= ok | ~is_free
                np.put_along_axis(G, col[..., None], np.where(is_free, g, 0.0)[..., None], axis=-1)
        elif f.family == "trig-poly":
            if self._F.shape[0]:
                w = np.cos(2 * np.pi * (U @ self._F.T) + self._phase) * (2 * np.pi * f._arrays["amplitudes"])
                G = w @ self._F
        else:
            delta = U - self._x0
            s = np.sin(np.pi * delta) / np.pi
            c = p["smoothing"]
            root = np.sqrt(c * c + self._const + np.sum(s * s, axis=-1))
            G = p["amplitude"] * s * np.cos(np.pi * delta) / root[..., None]
        if not f.has_analytic_gradient:
            eye = np.eye(self.k) * FD_STEP
            G = (self.values(U[..., None, :] + eye) - self.values(U[..., None, :] - eye)) / (2 * FD_STEP)
        return G, smooth


def restrict(f: FunctionSpec, sub: SubtorusSpec) -> Restricted:
    return Restricted(f, sub)


# ---------------------------------------------------------------- gradient p-norms

@dataclass(frozen=True)
class GradPNormEstimate:
    value: float
    std_error: float
    sample_count: int
    p: float
    finite_differences: bool = False
    resampled: int = 0


def smooth_gradient_samples(grad_fn, draw_fn, samples: int, chunk: int) -> tuple[np.ndarray, int]:
    """Gradients at ``samples`` smooth random points, replacing non-smooth draws.

    ``draw_fn(indices)`` returns points for counter indices; replacements continue the
    index sequence past ``samples`` so the outcome is deterministic. Gives up after
    10x oversampling.
    """
    out = []
    got = 0
    resampled = 0
    next_index = 0
    cap = OVERSAMPLE_CAP * samples
    while got < samples:
        if next_index >= cap:
            raise BudgetExceededError("non-smooth points exceeded the 10x resampling cap")
        want = min(chunk, samples - got, cap - next_index)
        idx = np.arange(next_index, next_index + want)
        next_index += want
        G, smooth = grad_fn(draw_fn(idx))
        resampled += int(np.count_nonzero(~smooth))
        out.append(G[smooth])
        got += int(np.count_nonzero(smooth))
    G = np.concatenate(out, axis=0)[:samples]
    return G, resampled


def estimate_grad_pnorm(f: FunctionSpec, p: float, samples: int, seed: SeedSpec) -> GradPNormEstimate:
    """Monte Carlo estimate of (int_{T^n} |grad f|^p)^{1/p} over uniform points."""
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    chunk = max(1, (1 << 20) // (f.n * (f.n if not f.has_analytic_gradient else 1)))
    G, resampled = smooth_gradient_samples(
        lambda X: gradient(f, X), lambda idx: uniforms(seed, f.n, idx), samples, chunk)
    powered = np.linalg.norm(G, axis=-1) ** p
    value, se, _, _ = pth_root_estimate(powered, p, seed)
    return GradPNormEstimate(value, se, samples, float(p), not f.has_analytic_gradient, resampled)


def normalize_to_unit_pnorm(f: FunctionSpec, p: float, samples: int, seed: SeedSpec,
                            *, return_scale: bool = False):
    """Rescale a trig-poly or smoothed-distance so its gradient p-norm is in [0.5, 1].

    f is left alone when its estimate is at least 0.5 and its 4-sigma upper bound is at
    most 1. Otherwise the upper bound is scaled to 0.99, so a fresh estimate lands above
    1 only by a 4-sigma fluctuation. The zero function is returned unchanged.
    """
    if f.family not in SCALABLE:
        raise UnsupportedOperationError(f"family {f.family} has no amplitude to rescale")
    est = estimate_grad_pnorm(f, p, samples, seed)
    upper = est.value + 4 * est.std_error
    if est.value == 0.0 or (est.value >= 0.5 and upper <= 1.0):
        scale = 1.0
    else:
        scale = NORMALIZE_MARGIN / upper
    g = f if scale == 1.0 else scaled(f, scale)
    return (g, scale) if return_scale else g


def zoo_listing() -> list[dict]:
    """Short description of each family, for ``zoo list``."""
    return [
        {"family": "dist-to-point", "alias": "a", "params": "x0 (list | 'origin' | 'random')", "lipschitz": "1"},
        {"family": "coordinate-sawtooth", "alias": "b", "params": "axis", "lipschitz": "1"},
        {"family": "max-sawtooth", "alias": "c", "params": "axes", "lipschitz": "1"},
        {"family": "trig-poly", "alias": "d",
         "params": "amplitudes, frequencies, phases [, unit_lipschitz] | random_terms, support, max_freq, seed",
         "lipschitz": "sum 2*pi*|a_j|*|m_j|"},
        {"family": "smoothed-distance", "alias": "e", "params": "x0, smoothing, amplitude", "lipschitz": "amplitude"},
    ]
