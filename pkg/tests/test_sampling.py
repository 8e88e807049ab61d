import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy import stats

from torusosc.errors import InvalidInputError
from torusosc.sampling import (
    SeedSpec,
    normals,
    philox4x32,
    sample_ball,
    sample_balls,
    sample_chord_point,
    sample_subset,
    sample_subsets,
    sample_subtorus,
    uniforms,
)


@pytest.mark.parametrize("ctr, key, expected", [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
])
def test_philox_known_answers(ctr, key, expected):
    # Random123 reference vectors for Philox4x32-10
    out = philox4x32(np.array(ctr, dtype=np.uint64), np.array(key, dtype=np.uint64))
    assert tuple(int(w) for w in out) == expected


def test_uniform_range_and_prefix_stability():
    s = SeedSpec(7, 3)
    u = uniforms(s, 5, np.arange(100))
    assert u.shape == (100, 5)
    assert np.all((u >= 0) & (u < 1))
    assert np.array_equal(uniforms(s, 2, np.arange(100)), u[:, :2])
    assert np.array_equal(uniforms(s, 9, np.arange(100))[:, :5], u)


def test_uniform_rows_independent_of_batch_split():
    s = SeedSpec(11, 99)
    whole = uniforms(s, 4, np.arange(1000))
    parts = np.vstack([uniforms(s, 4, np.arange(lo, lo + 250)) for lo in range(0, 1000, 250)])
    assert np.array_equal(whole, parts)
    assert np.array_equal(uniforms(s.at(17), 4), whole[17:18])


def test_uniform_distribution_ks():
    u = uniforms(SeedSpec(1, 2), 1, np.arange(20000))[:, 0]
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_normals_ks():
    z = normals(SeedSpec(5), 3, np.arange(10000)).ravel()
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_different_streams_differ():
    a = uniforms(SeedSpec(1, 1), 4, np.arange(10))
    b = uniforms(SeedSpec(1, 2), 4, np.arange(10))
    c = uniforms(SeedSpec(2, 1), 4, np.arange(10))
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_seed_validation():
    with pytest.raises(InvalidInputError):
        SeedSpec(-1)
    with pytest.raises(InvalidInputError):
        SeedSpec(2 ** 64)


def test_subset_full_and_deterministic():
    assert sample_subset(5, 5, SeedSpec(3)) == [0, 1, 2, 3, 4]
    s = SeedSpec(123, 4, 5)
    assert sample_subset(40, 3, s) == sample_subset(40, 3, s)
    with pytest.raises(InvalidInputError):
        sample_subset(3, 4, s)
    with pytest.raises(InvalidInputError):
        sample_subset(3, 0, s)


def _subset_counts(n, k, draws, seed):
    rows = sample_subsets(n, k, seed, np.arange(draws))
    assert np.all(np.diff(rows, axis=1) > 0)
    index = {c: i for i, c in enumerate(itertools.combinations(range(n), k))}
    counts = np.zeros(len(index))
    for r in map(tuple, rows):
        counts[index[r]] += 1
    return counts


@pytest.mark.parametrize("n, k", [(n, k) for n in range(2, 10) for k in range(1, n)
                                  if 2 <= math.comb(n, k) <= 100])
def test_subset_uniformity_chi_square(n, k):
    counts = _subset_counts(n, k, 100_000, SeedSpec(2024, n * 100 + k))
    assert stats.chisquare(counts).pvalue > 1e-4


def test_floyd_branch_uniform_marginals():
    # n > 64 and 4k < n takes Floyd's algorithm
    n, k, draws = 100, 3, 60_000
    rows = sample_subsets(n, k, SeedSpec(9), np.arange(draws))
    assert np.all(np.diff(rows, axis=1) > 0)
    hits = np.bincount(rows.ravel(), minlength=n)
    assert stats.chisquare(hits).pvalue > 1e-4
    # pair co-occurrence of two fixed elements matches k(k-1)/(n(n-1))
    both = np.mean(np.any(rows == 0, axis=1) & np.any(rows == n - 1, axis=1))
    assert both == pytest.approx(k * (k - 1) / (n * (n - 1)), abs=4e-4)


def test_subtorus_full():
    sub = sample_subtorus(3, 3, SeedSpec(0))
    assert sub.free_axes == (0, 1, 2)
    assert sub.fixed_axes == ()


def test_subtorus_base_zero_on_free_axes():
    sub = sample_subtorus(10, 3, SeedSpec(4, 4))
    assert all(sub.base.coords[i] == 0.0 for i in sub.free_axes)


def test_ball_degenerate_and_validation():
    assert sample_ball(0, 1.0, SeedSpec(1)).shape == (0,)
    with pytest.raises(InvalidInputError):
        sample_ball(2, 0.0, SeedSpec(1))


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_ball_radial_law_ks(dim):
    R = 0.3
    Z = sample_balls(dim, R, SeedSpec(77, dim), np.arange(20000))
    r = np.linalg.norm(Z, axis=1) / R
    assert r.max() <= 1.0
    assert stats.kstest(r, lambda t: np.clip(t, 0, 1) ** dim).pvalue > 1e-3


def test_ball_direction_isotropic():
    Z = sample_balls(3, 1.0, SeedSpec(8), np.arange(20000))
    assert np.allclose(Z.mean(axis=0), 0.0, atol=0.02)


def test_chord_point_degenerate():
    x = np.array([0.2, 0.3])
    assert np.allclose(sample_chord_point(x, x, SeedSpec(1)), x)


def test_chord_point_on_segment():
    x, z = np.array([0.0, 0.0]), np.array([1.0, 2.0])
    p = sample_chord_point(x, z, SeedSpec(3, 1, 4))
    assert p[1] == pytest.approx(2 * p[0])
    assert 0 <= p[0] <= 1


def test_thread_interleaving_is_irrelevant():
    s = SeedSpec(31337, 5)
    chunks = [np.arange(i, i + 100) for i in range(0, 1000, 100)]
    serial = [sample_subsets(50, 4, s, c) for c in chunks]
    with ThreadPoolExecutor(4) as pool:
        threaded = list(pool.map(lambda c: sample_subsets(50, 4, s, c), reversed(chunks)))
    for a, b in zip(serial, reversed(threaded)):
        assert np.array_equal(a, b)
