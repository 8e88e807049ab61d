"""Counter-based randomness.

Every random quantity is a pure function of ``(master_seed, stream_id, sample_index)``
plus the position of the draw within that sample. The generator is Philox4x32-10,
keyed by a hash of (master_seed, stream_id) and counted by (draw block, sample_index).
Results are therefore identical no matter how samples are split between workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .torus import SubtorusSpec

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_U64 = (1 << 64) - 1


def philox4x32(counter, key, rounds: int = 10) -> np.ndarray:
    """Philox4x32 block function.

    counter: array (..., 4) of uint32 words; key: pair of uint32 words (or array (..., 2)).
    Returns array (..., 4) of uint32 words as uint64.
    """
    c = np.asarray(counter, dtype=np.uint64) & _MASK32
    k = np.asarray(key, dtype=np.uint64) & _MASK32
    c0, c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    k0, k1 = k[..., 0], k[..., 1]
    for _ in range(rounds):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ k0,
            p1 & _MASK32,
            (p0 >> np.uint64(32)) ^ c3 ^ k1,
            p0 & _MASK32,
        )
        k0 = (k0 + np.uint64(_W0)) & _MASK32
        k1 = (k1 + np.uint64(_W1)) & _MASK32
    return np.stack([c0, c1, c2, c3], axis=-1)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return x ^ (x >> 31)


def stream_key(master_seed: int, stream_id: int) -> tuple[int, int]:
    h = _splitmix64(_splitmix64(master_seed & _U64) ^ (stream_id & _U64))
    return h & 0xFFFFFFFF, h >> 32


def stream_id_for(*parts) -> int:
    """Stable 64-bit stream id for a logical experiment, e.g. ``stream_id_for("osc", n, k)``."""
    text = "\x1f".join(repr(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: int = 0
    sample_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "sample_index"):
            v = int(getattr(self, name))
            if not 0 <= v <= _U64:
                raise InvalidInputError(f"{name} must be an unsigned 64-bit integer")
            object.__setattr__(self, name, v)

    def at(self, sample_index: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_id, sample_index)

    def substream(self, *tag) -> "SeedSpec":
        """Independent stream derived from this one, e.g. for a second kind of draw per sample."""
        return SeedSpec(self.master_seed, stream_id_for(self.stream_id, *tag), self.sample_index)


def _indices(seed: SeedSpec, indices) -> np.ndarray:
    if indices is None:
        return np.array([seed.sample_index], dtype=np.uint64)
    return np.asarray(indices, dtype=np.uint64).reshape(-1)


def uniforms(seed: SeedSpec, n_draws: int, indices=None) -> np.ndarray:
    """Uniform doubles in [0, 1) of shape (len(indices), n_draws).

    Row i depends only on (master_seed, stream_id, indices[i]); draw j of a row is the
    same whatever ``n_draws`` is, so callers can extend draws without changing prefixes.
    """
    idx = _indices(seed, indices)
    n_blocks = (n_draws + 1) // 2
    key = np.array(stream_key(seed.master_seed, seed.stream_id), dtype=np.uint64)
    ctr = np.zeros((idx.size, n_blocks, 4), dtype=np.uint64)
    ctr[:, :, 0] = np.arange(n_blocks, dtype=np.uint64)[None, :]
    ctr[:, :, 2] = (idx & _MASK32)[:, None]
    ctr[:, :, 3] = (idx >> np.uint64(32))[:, None]
    words = philox4x32(ctr, key)
    # two 32-bit words -> one 53-bit double
    hi = (words[..., 0::2] >> np.uint64(5)).astype(np.float64)
    lo = (words[..., 1::2] >> np.uint64(6)).astype(np.float64)
    u = (hi * 67108864.0 + lo) / 9007199254740992.0
    return u.reshape(idx.size, 2 * n_blocks)[:, :n_draws]


def normals(seed: SeedSpec, n_draws: int, indices=None) -> np.ndarray:
    """Standard normal draws via Box-Muller on the counter stream."""
    m = n_draws + (n_draws & 1)
    u = uniforms(seed, m, indices)
    u1 = 1.0 - u[:, 0::2]  # (0, 1]
    u2 = u[:, 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty_like(u)
    z[:, 0::2] = r * np.cos(2 * np.pi * u2)
    z[:, 1::2] = r * np.sin(2 * np.pi * u2)
    return z[:, :n_draws]


def _check_nk(n: int, k: int):
    if not (1 <= k <= n):
        raise InvalidInputError(f"need 1 <= k <= n, got n={n}, k={k}")


def _floyd(n: int, k: int, seed: SeedSpec, indices) -> np.ndarray:
    u = uniforms(seed, k, indices)
    chosen = np.empty((u.shape[0], k), dtype=np.int64)
    for step, j in enumerate(range(n - k, n)):
        t = np.minimum(np.floor(u[:, step] * (j + 1)).astype(np.int64), j)
        taken = np.any(chosen[:, :step] == t[:, None], axis=1)
        chosen[:, step] = np.where(taken, j, t)
    return chosen


def sample_subsets(n: int, k: int, seed: SeedSpec, indices=None) -> np.ndarray:
    """Uniform k-subsets of {0..n-1}, one sorted row per sample index.

    Floyd's algorithm needs only min(k, n - k) draws per sample; large subsets are taken
    as complements of small ones.
    """
    _check_nk(n, k)
    rows = _indices(seed, indices).size
    if k == n:
        return np.tile(np.arange(n), (rows, 1))
    if 2 * k <= n:
        return np.sort(_floyd(n, k, seed, indices), axis=1)
    mask = np.ones((rows, n), dtype=bool)
    np.put_along_axis(mask, _floyd(n, n - k, seed, indices), False, axis=1)
    return np.nonzero(mask)[1].reshape(rows, k)


def sample_subset(n: int, k: int, seed: SeedSpec) -> list[int]:
    return [int(i) for i in sample_subsets(n, k, seed)[0]]


def sample_subtori(n: int, k: int, seed: SeedSpec, indices=None) -> list[SubtorusSpec]:
    axes = sample_subsets(n, k, seed, indices)
    bases = uniforms(seed.substream("base"), n, indices)
    return [SubtorusSpec(n, tuple(int(i) for i in a), b) for a, b in zip(axes, bases)]


def sample_subtorus(n: int, k: int, seed: SeedSpec) -> SubtorusSpec:
    """Uniform coordinate subtorus: uniform axis set, independent uniform fixed coordinates."""
    return sample_subtori(n, k, seed)[0]


def sample_balls(dim: int, radius: float, seed: SeedSpec, indices=None) -> np.ndarray:
    """Uniform points of the Euclidean ball, shape (len(indices), dim)."""
    if dim < 0:
        raise InvalidInputError("ball dimension must be >= 0")
    if not radius > 0:
        raise InvalidInputError("ball radius must be positive")
    rows = _indices(seed, indices).size
    if dim == 0:
        return np.zeros((rows, 0))
    g = normals(seed, dim, indices)
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    u = uniforms(seed.substream("radius"), 1, indices)
    return g / norm * (radius * u ** (1.0 / dim))


def sample_ball(dim: int, radius: float, seed: SeedSpec) -> np.ndarray:
    return sample_balls(dim, radius, seed)[0]


def sample_chord_points(x, Z, seed: SeedSpec, indices=None) -> tuple[np.ndarray, np.ndarray]:
    """Points (1 - T) x + T Z with T uniform on [0, 1]; returns (points, T).

    ``Z`` may be a single point or one point per sample index.
    """
    t = uniforms(seed, 1, indices)[:, 0]
    x = np.asarray(x, dtype=float)
    Z = np.asarray(Z, dtype=float)
    pts = (1.0 - t)[:, None] * x + t[:, None] * Z
    return pts, t


def sample_chord_point(x, Z, seed: SeedSpec) -> np.ndarray:
    pts, _ = sample_chord_points(x, Z, seed)
    return pts[0]
