"""Small Monte Carlo helpers shared by the estimators."""

from __future__ import annotations

import math

import numpy as np

from .sampling import SeedSpec, uniforms

BOOTSTRAP_RESAMPLES = 100
_DEGENERATE = 1e-12


def mean_and_se(x) -> tuple[float, float]:
    """Sample mean and its standard error, with compensated summation for the mean."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    m = math.fsum(x) / n
    if n == 1:
        return m, 0.0
    var = math.fsum((x - m) ** 2) / (n - 1)
    return m, math.sqrt(var / n)


def pth_root_estimate(powered, p: float, seed: SeedSpec | None = None) -> tuple[float, float, float, float]:
    """Estimate (E X)^{1/p} from samples of X = |.|^p.

    Returns (root, root_se, mean, mean_se). The error of the root uses the delta method,
    se / (p * root^{p-1}); when the root is ~0 that degenerates and a 100-resample
    bootstrap of the root's 16-84% quantile spread is reported instead.
    """
    x = np.asarray(powered, dtype=float).reshape(-1)
    m, se = mean_and_se(x)
    m = max(m, 0.0)
    root = m ** (1.0 / p)
    if se == 0.0:
        return root, 0.0, m, 0.0
    if root > _DEGENERATE:
        return root, se / (p * root ** (p - 1.0)), m, se
    seed = seed or SeedSpec(0)
    u = uniforms(seed.substream("bootstrap"), x.size, np.arange(BOOTSTRAP_RESAMPLES))
    picks = np.minimum((u * x.size).astype(np.int64), x.size - 1)
    roots = np.maximum(x[picks].mean(axis=1), 0.0) ** (1.0 / p)
    lo, hi = np.quantile(roots, [0.16, 0.84])
    return root, float(hi - lo) / 2.0, m, se
