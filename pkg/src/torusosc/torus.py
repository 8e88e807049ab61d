"""Flat torus geometry: canonical coordinates, geodesic distance, coordinate subtori and charts.

Points of T^n = R^n / Z^n are stored by their canonical representative in [0, 1)^n.
Array helpers operate on the last axis so that batches of points of shape (..., n)
go through without Python loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ChartTooLargeError, InvalidInputError

TOL = 1e-12
MAX_CHART_RADIUS = 0.25


def wrap_array(raw) -> np.ndarray:
    """Reduce coordinates mod 1 into [0, 1), elementwise."""
    a = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("coordinates must be finite")
    w = np.mod(a, 1.0)
    # np.mod(-tiny, 1.0) rounds to 1.0
    w[w >= 1.0] = 0.0
    return w


def displacement(x, y) -> np.ndarray:
    """Shortest signed displacement from x to y, per axis, in [-1/2, 1/2)."""
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    return d - np.floor(d + 0.5)


def axis_dist(x, y) -> np.ndarray:
    """Per-axis circle distance min(d, 1 - d) with d = |x - y| after canonicalization."""
    d = np.abs(wrap_array(x) - wrap_array(y))
    return np.minimum(d, 1.0 - d)


def dist_array(x, y) -> np.ndarray:
    """Geodesic distance along the last axis; broadcasts over leading axes."""
    return np.sqrt(np.sum(axis_dist(x, y) ** 2, axis=-1))


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) < 1:
            raise InvalidInputError("a torus point needs at least one coordinate")
        for c in coords:
            if not (0.0 <= c < 1.0):
                raise InvalidInputError(f"coordinate {c!r} outside [0, 1); use wrap()")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)

    def __len__(self) -> int:
        return len(self.coords)


def wrap(raw: Sequence[float]) -> TorusPoint:
    """Canonical representative of a point of R^n in T^n."""
    return TorusPoint(tuple(wrap_array(np.atleast_1d(raw))))


def _coords(x) -> np.ndarray:
    if isinstance(x, TorusPoint):
        return x.array
    return np.asarray(x, dtype=float)


def torus_dist(x, y) -> float:
    """Geodesic distance between two points of T^n."""
    a, b = _coords(x), _coords(y)
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(dist_array(a, b))


@dataclass(frozen=True)
class SubtorusSpec:
    """A k-dimensional coordinate subtorus of T^n.

    ``free_axes`` are the coordinates that vary along the subtorus; ``base`` holds the
    fixed values of the remaining coordinates and is stored with zeros on the free axes.
    """

    ambient_dim: int
    free_axes: tuple[int, ...]
    base: TorusPoint = field(default=None)

    def __post_init__(self):
        n = int(self.ambient_dim)
        axes = tuple(int(i) for i in self.free_axes)
        if n < 1:
            raise InvalidInputError("ambient dimension must be >= 1")
        if not 1 <= len(axes) <= n:
            raise InvalidInputError(f"need 1 <= k <= n, got k={len(axes)}, n={n}")
        if list(axes) != sorted(set(axes)) or axes[0] < 0 or axes[-1] >= n:
            raise InvalidInputError(f"free axes must be distinct sorted indices in [0, {n})")
        base = np.zeros(n) if self.base is None else _coords(self.base).copy()
        if base.shape != (n,):
            raise InvalidInputError("base point has the wrong dimension")
        base = wrap_array(base)
        base[list(axes)] = 0.0
        object.__setattr__(self, "ambient_dim", n)
        object.__setattr__(self, "free_axes", axes)
        object.__setattr__(self, "base", TorusPoint(tuple(base)))

    @property
    def k(self) -> int:
        return len(self.free_axes)

    @property
    def fixed_axes(self) -> tuple[int, ...]:
        free = set(self.free_axes)
        return tuple(i for i in range(self.ambient_dim) if i not in free)

    def embed_array(self, u) -> np.ndarray:
        """Vectorized embed: u of shape (..., k) -> points of shape (..., n)."""
        u = np.asarray(u, dtype=float)
        if u.shape[-1:] != (self.k,):
            raise InvalidInputError(f"expected {self.k} subtorus coordinates, got shape {u.shape}")
        out = np.broadcast_to(self.base.array, u.shape[:-1] + (self.ambient_dim,)).copy()
        out[..., list(self.free_axes)] = wrap_array(u)
        return out

    def translated(self, t) -> "SubtorusSpec":
        return SubtorusSpec(self.ambient_dim, self.free_axes, wrap_array(self.base.array + np.asarray(t)))


def embed(sub: SubtorusSpec, u: Sequence[float]) -> TorusPoint:
    """Point of M with free coordinates ``u`` (in free-axes order)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (sub.k,):
        raise InvalidInputError(f"expected {sub.k} coordinates, got {u.shape[0]}")
    return TorusPoint(tuple(sub.embed_array(u)))


@dataclass(frozen=True)
class Segment:
    start: TorusPoint
    end: TorusPoint
    length: float

    def __post_init__(self):
        d = torus_dist(self.start, self.end)
        if abs(d - self.length) > TOL:
            raise InvalidInputError(f"recorded length {self.length} != geodesic distance {d}")
        if self.length > 0.5 + TOL:
            raise InvalidInputError("segment longer than 1/2 leaves a single chart")

    @classmethod
    def between(cls, start, end) -> "Segment":
        a = start if isinstance(start, TorusPoint) else TorusPoint(tuple(start))
        b = end if isinstance(end, TorusPoint) else TorusPoint(tuple(end))
        return cls(a, b, torus_dist(a, b))


@dataclass(frozen=True)
class Chart:
    """Isometry between a geodesic ball of the torus and a Euclidean ball around the origin."""

    center: TorusPoint
    radius: float

    def lift(self, x) -> np.ndarray:
        """Euclidean coordinates of torus point(s) ``x`` relative to the center."""
        v = displacement(self.center.array, _coords(x))
        if np.any(np.linalg.norm(v, axis=-1) > self.radius + TOL):
            raise InvalidInputError("point lies outside the chart ball")
        return v

    def project(self, v) -> np.ndarray:
        """Torus point(s) for Euclidean chart vector(s) ``v``."""
        v = np.asarray(v, dtype=float)
        if np.any(np.linalg.norm(v, axis=-1) > self.radius + TOL):
            raise InvalidInputError("vector lies outside the chart ball")
        return wrap_array(self.center.array + v)


def lift_chart(center, radius: float) -> Chart:
    if not math.isfinite(radius) or radius <= 0:
        raise InvalidInputError("chart radius must be positive")
    if radius > MAX_CHART_RADIUS:
        raise ChartTooLargeError(f"radius {radius} > 1/4 is not guaranteed to be a Euclidean ball")
    c = center if isinstance(center, TorusPoint) else wrap(center)
    return Chart(c, float(radius))
