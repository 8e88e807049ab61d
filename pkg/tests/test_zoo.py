import math

import numpy as np
import pytest
from scipy import integrate

from torusosc.errors import (
    InvalidInputError,
    NonDifferentiablePointError,
    UnsupportedOperationError,
)
from torusosc.sampling import SeedSpec
from torusosc.torus import SubtorusSpec, dist_array, wrap_array
from torusosc.zoo import (
    FAMILIES,
    constant,
    estimate_grad_pnorm,
    evaluate,
    from_json,
    from_record,
    from_template,
    gradient,
    normalize_to_unit_pnorm,
    restrict,
    scaled,
    zoo_construct,
    zoo_eval,
    zoo_grad,
)

TWO_PI = 2 * math.pi


def single_term(n):
    e1 = [1] + [0] * (n - 1)
    return zoo_construct("trig-poly", {"amplitudes": [1 / TWO_PI], "frequencies": [e1], "phases": [0.0]}, n)


def examples(n, seed=0):
    rng = np.random.default_rng(seed)
    return [
        zoo_construct("a", {"x0": rng.random(n)}, n),
        zoo_construct("b", {"axis": int(rng.integers(n))}, n),
        zoo_construct("c", {"axes": sorted(rng.choice(n, min(3, n), replace=False))}, n),
        from_template("d", {"random_terms": 4, "support": 2, "max_freq": 3, "seed": seed}, n),
        zoo_construct("e", {"x0": rng.random(n), "smoothing": 0.1, "amplitude": 0.8}, n),
    ]


def test_evaluation_examples():
    saw = zoo_construct("b", {"axis": 0}, 2)
    assert zoo_eval(saw, (0.25, 0.9)) == pytest.approx(0.25)
    assert zoo_eval(saw, (0.5, 0.1)) == pytest.approx(0.5)
    d = zoo_construct("a", {"x0": "origin"}, 2)
    assert zoo_eval(d, (0.5, 0.5)) == pytest.approx(math.sqrt(2) / 2)
    x0 = (0.3, 0.8, 0.1)
    assert zoo_eval(zoo_construct("a", {"x0": x0}, 3), x0) == 0.0
    assert zoo_eval(single_term(3), (0.25, 0.7, 0.1)) == pytest.approx(1 / TWO_PI)
    assert zoo_eval(constant(4), (0.1, 0.2, 0.3, 0.4)) == 0.0


def test_gradient_examples():
    saw = zoo_construct("b", {"axis": 0}, 3)
    assert np.allclose(zoo_grad(saw, (0.25, 0.4, 0.9)), (1, 0, 0))
    assert np.allclose(zoo_grad(single_term(3), (0.0, 0.3, 0.6)), (1, 0, 0))


def test_nondifferentiable_points():
    saw = zoo_construct("b", {"axis": 0}, 2)
    with pytest.raises(NonDifferentiablePointError):
        zoo_grad(saw, (0.5, 0.2))
    d = zoo_construct("a", {"x0": (0.2, 0.2)}, 2)
    with pytest.raises(NonDifferentiablePointError):
        zoo_grad(d, (0.2, 0.2))
    with pytest.raises(NonDifferentiablePointError):
        zoo_grad(d, (0.7, 0.4))  # cut locus
    m = zoo_construct("c", {"axes": [0, 1]}, 2)
    with pytest.raises(NonDifferentiablePointError):
        zoo_grad(m, (0.3, 0.7))  # tie between the two axes


@pytest.mark.parametrize("family, params", [
    ("b", {"axis": 3}),
    ("c", {"axes": []}),
    ("a", {"x0": (0.1,)}),
    ("d", {"amplitudes": [1.0], "frequencies": [[0.5, 0]], "phases": [0.0]}),
    ("d", {"amplitudes": [1.0], "frequencies": [[0, 0]], "phases": [0.0]}),
    ("e", {"smoothing": 0.0}),
    ("b", {"axis": 0, "bogus": 1}),
    ("nope", {}),
])
def test_construction_errors(family, params):
    with pytest.raises(InvalidInputError):
        zoo_construct(family, params, 3)


@pytest.mark.parametrize("family", FAMILIES)
def test_lipschitz_property(family):
    n = 5
    f = {g.family: g for g in examples(n, seed=3)}[family]
    rng = np.random.default_rng(11)
    X, Y = rng.random((1000, n)), rng.random((1000, n))
    # include close pairs, where the local slope is tested
    Y[:500] = wrap_array(X[:500] + 1e-3 * rng.standard_normal((500, n)))
    lhs = np.abs(evaluate(f, X) - evaluate(f, Y))
    assert np.all(lhs <= f.lipschitz_constant * dist_array(X, Y) + 1e-9)


@pytest.mark.parametrize("family", FAMILIES)
def test_wrap_invariance(family):
    n = 4
    f = {g.family: g for g in examples(n, seed=5)}[family]
    rng = np.random.default_rng(2)
    X = rng.random((200, n))
    shifts = rng.integers(-5, 6, size=(200, n))
    assert np.array_equal(evaluate(f, wrap_array(X + shifts)), evaluate(f, X + shifts))
    assert np.allclose(evaluate(f, X + shifts), evaluate(f, X), atol=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_gradient_matches_finite_differences(family):
    n = 4
    f = {g.family: g for g in examples(n, seed=7)}[family]
    X = np.random.default_rng(9).random((400, n))
    G, smooth = gradient(f, X, method="analytic")
    # keep points comfortably away from kinks so the central stencil stays on one side
    Gf, _ = gradient(f, X, method="fd")
    far = smooth & _away_from_kinks(f, X)
    assert far.sum() > 100
    err = np.linalg.norm(G[far] - Gf[far], axis=1) / np.maximum(np.linalg.norm(G[far], axis=1), 1e-300)
    assert err.max() <= 1e-5


def _away_from_kinks(f, X, margin=1e-4):
    if f.family == "coordinate-sawtooth":
        t = X[:, f.params["axis"]]
        return (np.abs(t - 0.5) > margin) & (t > margin) & (t < 1 - margin)
    if f.family == "max-sawtooth":
        axes = list(f.params["axes"])
        v = np.sort(np.minimum(X[:, axes], 1 - X[:, axes]), axis=1)
        t = X[:, axes]
        return (v[:, -1] - v[:, -2] > margin) & np.all((np.abs(t - 0.5) > margin) & (t > margin) & (t < 1 - margin), axis=1)
    if f.family == "dist-to-point":
        d = X - np.asarray(f.params["x0"])
        d = d - np.floor(d + 0.5)
        return np.all(np.abs(d) < 0.5 - margin, axis=1) & (np.linalg.norm(d, axis=1) > margin)
    return np.ones(len(X), dtype=bool)


def test_dist_gradient_is_unit():
    f = zoo_construct("a", {"x0": (0.1, 0.6, 0.3)}, 3)
    G, smooth = gradient(f, np.random.default_rng(0).random((1000, 3)))
    assert np.allclose(np.linalg.norm(G[smooth], axis=1), 1.0, atol=1e-9)


def test_pnorm_examples():
    seed = SeedSpec(1, 2)
    for p in (1.0, 2.0, 5.0):
        est = estimate_grad_pnorm(zoo_construct("a", {"x0": "origin"}, 3), p, 2000, seed)
        assert est.value == pytest.approx(1.0, abs=1e-12)
    assert estimate_grad_pnorm(constant(3), 2.0, 1000, seed).value == 0.0
    exact = math.sqrt(integrate.quad(lambda t: math.cos(TWO_PI * t) ** 2, 0, 1)[0])
    est = estimate_grad_pnorm(single_term(3), 2.0, 40_000, seed)
    assert abs(est.value - exact) <= 4 * est.std_error
    assert exact == pytest.approx(math.sqrt(0.5))


def test_pnorm_fd_fallback_flag():
    f = zoo_construct("e", {"x0": "origin"}, 2, analytic_gradient=False)
    g = zoo_construct("e", {"x0": "origin"}, 2)
    seed = SeedSpec(4)
    a, b = estimate_grad_pnorm(f, 3.0, 5000, seed), estimate_grad_pnorm(g, 3.0, 5000, seed)
    assert a.finite_differences and not b.finite_differences
    assert a.value == pytest.approx(b.value, rel=1e-6)


def test_pnorm_resamples_nonsmooth_points():
    f = zoo_construct("b", {"axis": 0}, 1)
    est = estimate_grad_pnorm(f, 2.0, 1000, SeedSpec(0))
    assert est.value == 1.0


def test_normalize_examples():
    seed = SeedSpec(3, 3)
    f = single_term(2)
    big = scaled(f, 2.0 / math.sqrt(0.5))
    g, scale = normalize_to_unit_pnorm(big, 2.0, 20_000, seed, return_scale=True)
    est = estimate_grad_pnorm(big, 2.0, 20_000, seed)
    assert est.value == pytest.approx(2.0, rel=0.02)
    assert scale == pytest.approx(0.99 / (est.value + 4 * est.std_error), rel=1e-12)
    assert scale == pytest.approx(0.99 / 2.0, rel=0.03)  # roughly halved
    assert g.params["amplitudes"][0] == pytest.approx(big.params["amplitudes"][0] * scale)
    h, s2 = normalize_to_unit_pnorm(g, 2.0, 20_000, seed, return_scale=True)
    assert 0.99 <= s2 <= 1.0
    with pytest.raises(UnsupportedOperationError):
        normalize_to_unit_pnorm(zoo_construct("a", {}, 2), 2.0, 100, seed)
    assert normalize_to_unit_pnorm(constant(2), 2.0, 100, seed) == constant(2)


@pytest.mark.parametrize("i", range(10))
def test_normalized_trig_polys_reestimate_in_range(i):
    f = from_template("d", {"random_terms": 3, "support": 2, "max_freq": 4, "seed": i}, 6)
    f = scaled(f, 5.0 if i % 2 else 0.1)
    g = normalize_to_unit_pnorm(f, 4.0, 5000, SeedSpec(i))
    again = estimate_grad_pnorm(g, 4.0, 5000, SeedSpec(i + 100))
    assert 0.5 <= again.value <= 1.0


def test_record_round_trip():
    for f in examples(5, seed=1):
        g = from_json(f.to_json())
        assert g == f
        assert g.to_json() == f.to_json()
    rec = examples(3)[1].to_record()
    with pytest.raises(InvalidInputError):
        from_record({**rec, "extra": 1})
    with pytest.raises(InvalidInputError):
        from_record({**rec, "lipschitz_constant": 0.5})


def test_unit_lipschitz_option():
    f = zoo_construct("d", {"amplitudes": [2.0, 1.0], "frequencies": [[1, 1], [0, 3]],
                            "phases": [0.0, 1.0], "unit_lipschitz": True}, 2)
    assert f.lipschitz_constant == pytest.approx(1.0)


def test_scaled_rejects_nonscalable():
    with pytest.raises(UnsupportedOperationError):
        scaled(zoo_construct("b", {}, 2), 2.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_restriction_matches_ambient(family):
    n = 6
    f = {g.family: g for g in examples(n, seed=13)}[family]
    rng = np.random.default_rng(1)
    for k in (1, 2, 4):
        sub = SubtorusSpec(n, tuple(sorted(rng.choice(n, k, replace=False))), rng.random(n))
        r = restrict(f, sub)
        U = rng.random((300, k))
        X = sub.embed_array(U)
        assert np.allclose(r.values(U), evaluate(f, X), atol=1e-12)
        G, smooth = r.grads(U)
        Gf, smooth_f = gradient(f, X)
        both = smooth & smooth_f
        assert np.allclose(G[both], Gf[both][:, list(sub.free_axes)], atol=1e-12)


def test_random_x0_template_is_deterministic():
    a = from_template("a", {"x0": "random", "seed": 5}, 4)
    b = from_template("a", {"x0": "random", "seed": 5}, 4)
    c = from_template("a", {"x0": "random", "seed": 6}, 4)
    assert a == b and a != c


def test_restricted_lipschitz_and_active_axes():
    rng = np.random.default_rng(21)
    n = 5
    fns = [
        zoo_construct("a", {"x0": rng.random(n)}, n),
        zoo_construct("b", {"axis": 3}, n),
        zoo_construct("c", {"axes": [0, 3]}, n),
        zoo_construct("d", {"amplitudes": [0.3, 0.1], "frequencies": [[1, 0, 0, 2, 0], [0, 0, 0, 1, 0]],
                            "phases": [0.1, 0.4]}, n),
        zoo_construct("e", {"x0": rng.random(n), "smoothing": 0.1}, n),
    ]
    for _ in range(5):
        sub = SubtorusSpec(n, tuple(sorted(rng.choice(n, 2, replace=False))), rng.random(n))
        for f in fns:
            r = restrict(f, sub)
            assert 0.0 <= r.lipschitz <= f.lipschitz_constant
            U, V = rng.random((500, 2)), rng.random((500, 2))
            d = np.linalg.norm(wrap_array(U - V + 0.5) - 0.5, axis=1)
            assert np.all(np.abs(r.values(U) - r.values(V)) <= r.lipschitz * d + 1e-12)
            inactive = [i for i in range(2) if i not in r.active_axes]
            W = U.copy()
            W[:, inactive] = rng.random((500, len(inactive)))
            assert np.allclose(r.values(W), r.values(U), atol=1e-12)
            if not r.active_axes:
                assert r.lipschitz == 0.0
