"""Parameter arithmetic: admissible subtorus dimensions, delta, and the lemma inequality chain.

Admissible dimensions need n far beyond floating-point range (k >= 1 already requires
log n in the hundreds), so every inequality is evaluated between logarithms. Functions
taking ``n`` accept either an ``int`` (any size) or ``LogN(value)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .errors import InvalidInputError

C_DEFAULT = 1.0 / 200.0
EXACT_LIMIT = 64


@dataclass(frozen=True)
class LogN:
    """An ambient dimension given by its natural logarithm."""

    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise InvalidInputError("log n must be finite and >= 0")


NLike = Union[int, LogN]


def parse_n(text: str) -> NLike:
    """``"1000"`` -> 1000, ``"log:250.5"`` -> LogN(250.5)."""
    text = text.strip()
    try:
        if text.startswith("log:"):
            return LogN(float(text[4:]))
        return int(text)
    except ValueError:
        raise InvalidInputError(f"cannot parse n from {text!r}") from None


def log_n(n: NLike) -> float:
    if isinstance(n, LogN):
        return n.value
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InvalidInputError(f"n must be an integer >= 1 or LogN, got {n!r}")
    return math.log(n)


def _check_unit(name: str, x: float):
    if not (0.0 < x <= 1.0):
        raise InvalidInputError(f"{name} must lie in (0, 1], got {x}")


def _log_log(factor: float, logn: float) -> float:
    # log log(factor * n), computed from log n
    return math.log(math.log(factor) + logn)


def theorem1_denominator(n: NLike, eps: float) -> float:
    _check_unit("eps", eps)
    return _log_log(3.0, log_n(n)) + abs(math.log(eps))


def standing_denominator(n: NLike, eps: float, alpha: float) -> float:
    _check_unit("eps", eps)
    _check_unit("alpha", alpha)
    return math.fsum([_log_log(5.0, log_n(n)), abs(math.log(eps)), abs(math.log(alpha))])


def theorem1_k(n: NLike, eps: float, c: float = C_DEFAULT) -> int:
    """floor(c log n / (log log 3n + |log eps|)); 0 means no guarantee at this n."""
    return max(0, math.floor(c * log_n(n) / theorem1_denominator(n, eps)))


def standing_k_limit(n: NLike, eps: float, alpha: float, c: float = C_DEFAULT) -> float:
    """Right-hand side c log n / (log log 5n + |log eps| + |log alpha|) of the standing assumption."""
    return c * log_n(n) / standing_denominator(n, eps, alpha)


def max_admissible_k(n: NLike, eps: float, alpha: float, c: float = C_DEFAULT) -> int:
    return max(0, math.floor(standing_k_limit(n, eps, alpha, c)))


def is_admissible(n: NLike, eps: float, alpha: float, k: int, c: float = C_DEFAULT) -> bool:
    return 1 <= k <= standing_k_limit(n, eps, alpha, c)


def p_of(alpha: float, k: int) -> float:
    return (1 + alpha) * k


def delta_of(eps: float, alpha: float, k: int) -> float:
    """alpha / (16 (1 + alpha)) * eps / k^{3/2}."""
    _check_unit("eps", eps)
    _check_unit("alpha", alpha)
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    return alpha / (16 * (1 + alpha)) * eps / k ** 1.5


@dataclass(frozen=True)
class BoundParams:
    n: NLike
    eps: float
    alpha: float
    k: int
    p: float
    delta: float
    c: float = C_DEFAULT

    @classmethod
    def build(cls, n: NLike, eps: float, alpha: float, k: int, c: float = C_DEFAULT) -> "BoundParams":
        log_n(n)
        return cls(n, eps, alpha, k, p_of(alpha, k), delta_of(eps, alpha, k), c)

    @property
    def log_n(self) -> float:
        return log_n(self.n)


@dataclass(frozen=True)
class Inequality:
    """lhs <= rhs, both as natural logarithms."""

    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


@dataclass(frozen=True)
class Lemma1Check:
    holds: bool
    params: BoundParams
    inequalities: dict[str, Inequality]

    @property
    def failing(self) -> list[str]:
        return [k for k, v in self.inequalities.items() if not v.holds]


def check_lemma1(n: NLike, eps: float, alpha: float, k: int, *, c: float = C_DEFAULT,
                 delta_fn: Callable[[float, float, int], float] = delta_of) -> Lemma1Check:
    """Evaluate the lemma's conclusions and the intermediate steps of its proof in log space.

    ``holds`` reports the two conclusions: (2k/(delta^2 n))^{1/p} <= sqrt(k) delta and
    k <= n/2. The diagnostics also contain (32 k / alpha)^{2p+8} <= n and
    (32 k / alpha)^{12k} <= n.
    """
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    ln = log_n(n)
    p = p_of(alpha, k)
    delta = delta_fn(eps, alpha, k)
    lk, ld = math.log(k), math.log(delta)
    lc = math.log(32.0 / alpha * k)
    ineqs = {
        "power_bound": Inequality("(2k/(delta^2 n))^(1/p) <= sqrt(k)*delta",
                                  math.fsum([math.log(2.0), lk, -2 * ld, -ln]) / p, 0.5 * lk + ld),
        "k_le_half_n": Inequality("k <= n/2", lk, ln - math.log(2.0)),
        "exp_2p_plus_8": Inequality("(32k/alpha)^(2p+8) <= n", (2 * p + 8) * lc, ln),
        "exp_12k": Inequality("(32k/alpha)^(12k) <= n", 12 * k * lc, ln),
    }
    holds = ineqs["power_bound"].holds and ineqs["k_le_half_n"].holds
    return Lemma1Check(holds, BoundParams(n, eps, alpha, k, p, delta, c), ineqs)


def avoid_probability(n: int, k: int, m: int) -> Union[Fraction, float]:
    """P(J avoids a fixed m-set) for J uniform among k-subsets of an n-set.

    Exact ``Fraction`` for n <= 64, float otherwise.
    """
    if not (1 <= k <= n and 0 <= m <= n):
        raise InvalidInputError(f"need 1 <= k <= n and 0 <= m <= n, got n={n}, k={k}, m={m}")
    if m > n - k:
        return Fraction(0) if n <= EXACT_LIMIT else 0.0
    if n <= EXACT_LIMIT:
        out = Fraction(1)
        for j in range(k):
            out *= Fraction(n - m - j, n - j)
        return out
    return math.exp(math.fsum(math.log((n - m - j) / (n - j)) for j in range(k)))


def avoid_bound(n: NLike, k: int, delta: float) -> float:
    """max(0, 1 - 2k/(delta^2 n))."""
    if k < 1 or not delta > 0:
        raise InvalidInputError("need k >= 1 and delta > 0")
    log_ratio = math.log(2 * k) - 2 * math.log(delta) - log_n(n)
    if log_ratio >= 0:
        return 0.0
    return max(0.0, -math.expm1(log_ratio) if log_ratio > -700 else 1.0)


def bounds_table(n: NLike, eps: float, alpha: float, k: int | None = None, c: float = C_DEFAULT) -> dict:
    """Everything the ``bounds`` command prints, as a flat record."""
    kmax = max_admissible_k(n, eps, alpha, c)
    k_eval = k if k is not None else max(kmax, 1)
    check = check_lemma1(n, eps, alpha, k_eval, c=c)
    row = {
        "log_n": log_n(n),
        "eps": eps,
        "alpha": alpha,
        "c": c,
        "theorem1_k": theorem1_k(n, eps, c),
        "k_max": kmax,
        "k": k_eval,
        "admissible": is_admissible(n, eps, alpha, k_eval, c),
        "p": p_of(alpha, k_eval),
        "delta": delta_of(eps, alpha, k_eval),
        "lemma1_holds": check.holds,
    }
    for key, ineq in check.inequalities.items():
        row[f"slack_{key}"] = ineq.slack
    return row
