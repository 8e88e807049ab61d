import math

import numpy as np
import pytest

from torusosc.errors import BudgetExceededError, InvalidInputError
from torusosc.oscillation import (
    GapPolicy,
    OscStatus,
    covering_radius,
    grid_osc,
    osc_success_indicator,
    refine_osc,
)
from torusosc.torus import SubtorusSpec
from torusosc.zoo import constant, zoo_construct


def sine(n, a, phase=0.0, axis=0):
    m = [0] * n
    m[axis] = 1
    return zoo_construct("d", {"amplitudes": [a], "frequencies": [m], "phases": [phase]}, n)


def test_constant_grid():
    f = constant(3)
    cert = grid_osc(f, SubtorusSpec(3, (0, 2)), 8)
    assert cert.osc_lower == 0.0 and cert.osc_upper == 0.0
    # constant on M but with a positive declared L
    g = sine(3, 0.2, axis=1)
    sub = SubtorusSpec(3, (0, 2), (0, 0.3, 0))
    cert = grid_osc(g, sub, 10)
    assert cert.osc_lower == 0.0
    assert 0.0 <= cert.osc_upper <= 2 * g.lipschitz_constant * math.sqrt(2) / 20
    assert cert.lipschitz_used == 0.0
    assert refine_osc(g, sub, 1e-9).gap == 0.0


def test_sawtooth_grid_example():
    f = zoo_construct("b", {"axis": 1}, 3)
    cert = grid_osc(f, SubtorusSpec(3, (1,), (0.7, 0, 0.2)), 100)
    assert cert.osc_lower == 0.5
    assert cert.osc_upper == pytest.approx(0.51, abs=1e-15)
    assert cert.evaluations == 100


def test_dist_grid_example():
    f = zoo_construct("a", {"x0": (0.3, 0.6)}, 2)
    cert = grid_osc(f, SubtorusSpec(2, (0, 1)), 64)
    assert math.sqrt(2) / 2 - 0.02 <= cert.osc_lower <= math.sqrt(2) / 2
    assert cert.osc_upper >= math.sqrt(2) / 2


@pytest.mark.parametrize("k, m", [(1, 7), (2, 16), (3, 9)])
def test_gap_law(k, m):
    f = zoo_construct("a", {"x0": (0.1, 0.2, 0.3, 0.4)}, 4)
    cert = grid_osc(f, SubtorusSpec(4, tuple(range(k)), (0, 0, 0, 0.45)), m)
    assert cert.lipschitz_used == f.lipschitz_constant
    assert cert.gap == pytest.approx(2 * f.lipschitz_constant * math.sqrt(k) / (2 * m), rel=1e-12)
    assert covering_radius(k, m) == math.sqrt(k) / (2 * m)


def test_grid_validation():
    f = constant(4)
    with pytest.raises(BudgetExceededError):
        grid_osc(f, SubtorusSpec(4, (0, 1, 2, 3)), 100)
    with pytest.raises(InvalidInputError):
        grid_osc(f, SubtorusSpec(4, (0,)), 1)


def test_refine_constant_collapses():
    cert = refine_osc(constant(2), SubtorusSpec(2, (0, 1)), 1e-9)
    assert cert.gap == 0.0
    assert cert.evaluations <= 3


def test_refine_sawtooth_example():
    f = zoo_construct("b", {"axis": 0}, 2)
    cert = refine_osc(f, SubtorusSpec(2, (0,), (0, 0.4)), 1e-3)
    assert 0.499 <= cert.osc_lower <= 0.5
    assert 0.5 <= cert.osc_upper <= 0.501
    assert not cert.exhausted


def test_refine_budget_flag():
    f = zoo_construct("a", {"x0": (0.1, 0.2, 0.3)}, 3)
    cert = refine_osc(f, SubtorusSpec(3, (0, 1, 2)), 1e-9, budget=500)
    assert cert.exhausted
    assert cert.evaluations <= 500
    assert cert.osc_lower <= math.sqrt(3) / 2 <= cert.osc_upper


def test_refine_is_deterministic():
    f = zoo_construct("d", {"amplitudes": [0.1, 0.2], "frequencies": [[1, 2], [3, -1]], "phases": [0.2, 0.9]}, 2)
    sub = SubtorusSpec(2, (0, 1))
    a, b = refine_osc(f, sub, 1e-4), refine_osc(f, sub, 1e-4)
    assert a == b


def test_classification_examples():
    sub = SubtorusSpec(4, (1,), (0.1, 0, 0.3, 0.9))
    assert osc_success_indicator(constant(4), sub, 0.1).status is OscStatus.SUCCESS
    saw = zoo_construct("b", {"axis": 1}, 4)
    dec = osc_success_indicator(saw, sub, 0.4)
    assert dec.status is OscStatus.FAILURE
    assert dec.certificate.osc_lower == 0.5


def test_tight_case_undecided_until_refined():
    a = 0.1
    f = sine(2, a, phase=0.1)
    sub = SubtorusSpec(2, (0,), (0, 0.5))
    eps = 2 * a - 5e-5  # true oscillation 2a sits just above eps
    coarse = osc_success_indicator(f, sub, eps, GapPolicy(m=32, refine=False))
    assert coarse.status is OscStatus.UNDECIDED
    fine = osc_success_indicator(f, sub, eps, GapPolicy(m=32, refine=True, budget=20_000))
    assert fine.status is OscStatus.FAILURE
    assert fine.certificate.gap > 0
    starved = osc_success_indicator(f, sub, eps, GapPolicy(m=32, refine=True, budget=8))
    assert starved.status is OscStatus.UNDECIDED


def test_restriction_monotonicity():
    rng = np.random.default_rng(4)
    f = zoo_construct("d", {"amplitudes": [0.1, 0.07], "frequencies": [[1, 0, 2, 0], [0, 1, 1, 1]],
                            "phases": [0.0, 0.5]}, 4)
    for _ in range(10):
        base = rng.random(4)
        big = SubtorusSpec(4, (0, 1, 2), base)
        small = SubtorusSpec(4, (0, 2), base)
        cb, cs = grid_osc(f, big, 16), grid_osc(f, small, 16)
        slack = 2 * f.lipschitz_constant * covering_radius(3, 16)
        assert cs.osc_lower <= cb.osc_upper + slack


@pytest.mark.parametrize("method", ["grid", "refine"])
def test_translation_invariance(method):
    m = 32
    t = np.array([5 / m, 0.137, 11 / m, 0.61])  # free components on the lattice
    x0 = np.array([0.2, 0.45, 0.8, 0.05])
    f = zoo_construct("a", {"x0": x0}, 4)
    g = zoo_construct("a", {"x0": (x0 + t) % 1}, 4)
    sub = SubtorusSpec(4, (0, 2), (0, 0.3, 0, 0.9))
    moved = sub.translated(t)
    if method == "grid":
        a, b = grid_osc(f, sub, m), grid_osc(g, moved, m)
    else:
        t[[0, 2]] = 0.5  # box centres stay aligned under half turns
        g = zoo_construct("a", {"x0": (x0 + t) % 1}, 4)
        moved = sub.translated(t)
        a, b = refine_osc(f, sub, 1e-3), refine_osc(g, moved, 1e-3)
    assert b.osc_lower == pytest.approx(a.osc_lower, abs=1e-12)
    assert b.osc_upper == pytest.approx(a.osc_upper, abs=1e-12)


def test_enclosure_of_known_oscillations():
    rng = np.random.default_rng(8)
    for trial in range(12):
        n = int(rng.integers(3, 7))
        k = int(rng.integers(1, 4))
        axes = tuple(sorted(rng.choice(n, k, replace=False)))
        base = rng.random(n)
        sub = SubtorusSpec(n, axes, base)
        x0 = sub.embed_array(rng.random(k))
        cases = [
            (constant(n), 0.0),
            (zoo_construct("b", {"axis": int(axes[0])}, n), 0.5),
            (zoo_construct("b", {"axis": int(sub.fixed_axes[0])} if sub.fixed_axes else {"axis": 0}, n),
             0.0 if sub.fixed_axes else 0.5),
            (zoo_construct("a", {"x0": x0}, n), math.sqrt(k) / 2),
            (sine(n, 0.05, phase=rng.random(), axis=int(axes[-1])), 0.1),
        ]
        for f, truth in cases:
            for cert in (grid_osc(f, sub, 12), refine_osc(f, sub, 1e-3, budget=400_000)):
                assert cert.osc_lower - 1e-12 <= truth <= cert.osc_upper + 1e-12
            assert refine_osc(f, sub, 1e-3, budget=400_000).gap <= 1e-3
