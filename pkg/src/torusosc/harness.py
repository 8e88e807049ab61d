"""Experiment orchestration: configs, success-fraction and scaling experiments, verification batteries.

Configs are JSON objects whose keys are the fields of :class:`ExperimentConfig`;
unknown keys are rejected. Results are flat :class:`ResultRecord` rows written as CSV
or JSON. Trials run on a thread pool but every random draw is keyed by
(master_seed, stream_id, trial index), so output does not depend on ``threads``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np
from scipy.stats import binomtest

from . import bounds as bd
from .errors import ConfigError
from .morrey import (
    EQUAL,
    PAPER,
    build_path,
    chained_osc_bound,
    density_identity_mc,
    density_qnorm,
    mc_chord_verify,
    path_violations,
)
from .oscillation import GapPolicy, OscStatus, grid_osc, osc_success_indicator
from .projection import (
    exact_projection_moment,
    lemma4_bound,
    mc_projection_moment,
    restricted_grad_pnorm,
    split_bound,
)
from .sampling import SeedSpec, normals, sample_subtori, stream_id_for, uniforms
from .torus import SubtorusSpec
from .zoo import SCALABLE, canonical_family, from_template, normalize_to_unit_pnorm

EXPERIMENTS = ("theorem-verify", "scaling", "lemma4-verify", "morrey-verify", "bounds-table", "osc", "battery")
FORMATS = ("csv", "json")
OSC_MAX_K = 4

REQUIRED = {
    "theorem-verify": ("functions", "n_values", "k_values", "eps", "trials"),
    "scaling": ("functions", "n_values", "k_values", "eps", "trials"),
    "lemma4-verify": ("n_values", "k_values", "samples", "trials"),
    "morrey-verify": ("functions", "k_values", "alpha", "samples", "trials"),
    "bounds-table": ("n_values", "eps", "alpha"),
    "osc": ("functions", "n_values", "k_values", "grid_m"),
    "battery": ("samples",),
}


@dataclass
class ExperimentConfig:
    experiment: str
    functions: list = field(default_factory=list)
    n_values: list = field(default_factory=list)
    k_values: list = field(default_factory=list)
    eps: list = field(default_factory=list)
    alpha: list = field(default_factory=lambda: [1.0])
    p_values: list = field(default_factory=list)
    trials: int = 0
    samples: int = 0
    master_seed: int = 0
    grid_m: int = 32
    refine: bool = True
    budget: int = 20_000
    mode: str = EQUAL
    output: Optional[str] = None
    format: str = "csv"
    threads: int = 1

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict) or not data:
            raise ConfigError("config must be a non-empty JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' key")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        for key in REQUIRED[self.experiment]:
            val = getattr(self, key)
            if val in (None, [], 0):
                raise ConfigError(f"{self.experiment} requires a non-empty {key!r}")
        for key in ("trials", "samples", "master_seed", "grid_m", "budget", "threads"):
            v = getattr(self, key)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"{key} must be a non-negative integer")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.mode not in ("equal", "paper", EQUAL, PAPER):
            raise ConfigError(f"unknown path mode {self.mode!r}")
        for fn in self.functions:
            if not isinstance(fn, dict) or set(fn) - {"family", "params"} or "family" not in fn:
                raise ConfigError("each function must be {'family': ..., 'params': {...}}")
            try:
                canonical_family(fn["family"])
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        for e in self.eps:
            if not (isinstance(e, (int, float)) and 0 < e <= 1):
                raise ConfigError("eps values must lie in (0, 1]")
        for a in self.alpha:
            if not (isinstance(a, (int, float)) and 0 < a <= 1):
                raise ConfigError("alpha values must lie in (0, 1]")
        for k in self.k_values:
            if isinstance(k, bool) or not isinstance(k, int) or k < 1:
                raise ConfigError("k values must be positive integers")
        if self.experiment == "bounds-table":
            for n in self.n_values:
                try:
                    bd.log_n(bd.parse_n(str(n)))
                except ValueError:
                    raise ConfigError(f"bad n value {n!r}") from None
        else:
            for n in self.n_values:
                if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                    raise ConfigError("n values must be positive integers")
        if self.experiment in ("theorem-verify", "scaling", "osc"):
            if max(self.k_values) > OSC_MAX_K:
                raise ConfigError(f"oscillation experiments support k <= {OSC_MAX_K}")
            if max(self.k_values) > min(self.n_values) and self.experiment == "theorem-verify":
                raise ConfigError("every k must satisfy k <= n")


CSV_COLUMNS = ("experiment", "function_family", "n", "k", "eps", "alpha", "metric", "value", "std_error",
               "success", "failure", "undecided", "trials", "master_seed", "stream_id", "duration_ms",
               "timestamp")
TIMING_COLUMNS = ("duration_ms", "timestamp")


@dataclass
class ResultRecord:
    experiment: str
    metric: str
    value: float
    function_family: str = ""
    n: Any = ""
    k: Any = ""
    eps: Any = ""
    alpha: Any = ""
    std_error: Any = ""
    success: Any = ""
    failure: Any = ""
    undecided: Any = ""
    trials: Any = ""
    master_seed: Any = ""
    stream_id: Any = ""
    duration_ms: Any = ""
    timestamp: str = ""

    def row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}

    def stable_row(self) -> dict:
        """The row without wall-clock columns, for reproducibility comparisons."""
        return {c: v for c, v in self.row().items() if c not in TIMING_COLUMNS}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def records_to_csv(records, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        row = r.row() if hasattr(r, "row") else r
        w.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def records_to_json(records) -> str:
    rows = [r.row() if hasattr(r, "row") else r for r in records]
    return json.dumps(rows, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _params_key(fn: dict) -> str:
    return json.dumps(fn.get("params", {}), sort_keys=True)


def _pool_map(fn: Callable, items, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _prepare_function(fn: dict, n: int, k: int, alpha: float, samples: int, master_seed: int):
    f = from_template(fn["family"], fn.get("params", {}), n)
    if f.family in SCALABLE:
        seed = SeedSpec(master_seed, stream_id_for("normalize", fn["family"], _params_key(fn), n, k, alpha))
        f = normalize_to_unit_pnorm(f, (1 + alpha) * k, max(samples, 2000), seed)
    return f


# ---------------------------------------------------------------- theorem-level experiments

def run_theorem_verify(config: ExperimentConfig) -> list[ResultRecord]:
    """Success fraction of Osc(f; M) <= eps over random coordinate subtori M."""
    config.validate()
    alpha = float(config.alpha[0]) if config.alpha else 1.0
    policy = GapPolicy(m=config.grid_m, refine=config.refine, budget=config.budget)
    out = []
    for fn in config.functions:
        fam = canonical_family(fn["family"])
        for n in config.n_values:
            for k in config.k_values:
                f = _prepare_function(fn, n, k, alpha, config.samples, config.master_seed)
                for eps in config.eps:
                    t0 = time.perf_counter()
                    stream = stream_id_for("theorem-verify", fam, _params_key(fn), n, k, eps)
                    seed = SeedSpec(config.master_seed, stream)
                    subs = sample_subtori(n, k, seed, np.arange(config.trials))
                    decisions = _pool_map(lambda s: osc_success_indicator(f, s, eps, policy).status,
                                          subs, config.threads)
                    succ = sum(d is OscStatus.SUCCESS for d in decisions)
                    fail = sum(d is OscStatus.FAILURE for d in decisions)
                    und = sum(d is OscStatus.UNDECIDED for d in decisions)
                    trials = config.trials
                    lo, hi = wilson_interval(succ, trials)
                    frac = succ / trials
                    ms = (time.perf_counter() - t0) * 1000
                    common = dict(experiment="theorem-verify", function_family=fam, n=n, k=k, eps=eps,
                                  alpha=alpha, success=succ, failure=fail, undecided=und, trials=trials,
                                  master_seed=config.master_seed, stream_id=stream, duration_ms=round(ms, 3),
                                  timestamp=_now())
                    out += [
                        ResultRecord(metric="success_fraction", value=frac,
                                     std_error=math.sqrt(frac * (1 - frac) / trials), **common),
                        ResultRecord(metric="success_ci95_low", value=lo, **common),
                        ResultRecord(metric="success_ci95_high", value=hi, **common),
                        ResultRecord(metric="optimistic_fraction", value=(succ + und) / trials, **common),
                    ]
    return out


def run_scaling(config: ExperimentConfig) -> list[ResultRecord]:
    """Empirical k*(n, eps): largest k whose median certified oscillation is <= eps."""
    config.validate()
    alpha = float(config.alpha[0]) if config.alpha else 1.0
    out = []
    for fn in config.functions:
        fam = canonical_family(fn["family"])
        for n in config.n_values:
            for eps in config.eps:
                t_start = time.perf_counter()
                k_star = 0
                for k in sorted(config.k_values):
                    if k > n:
                        continue
                    t0 = time.perf_counter()
                    f = _prepare_function(fn, n, k, alpha, config.samples, config.master_seed)
                    stream = stream_id_for("scaling", fam, _params_key(fn), n, k)
                    subs = sample_subtori(n, k, SeedSpec(config.master_seed, stream), np.arange(config.trials))
                    m = config.grid_m
                    while m > 2 and m ** k > 10 ** 6:
                        m //= 2
                    certs = _pool_map(lambda s: grid_osc(f, s, m), subs, config.threads)
                    upper = float(np.median([c.osc_upper for c in certs]))
                    lower = float(np.median([c.osc_lower for c in certs]))
                    if upper <= eps:
                        k_star = k
                    common = dict(experiment="scaling", function_family=fam, n=n, k=k, eps=eps, alpha=alpha,
                                  trials=config.trials, master_seed=config.master_seed, stream_id=stream,
                                  timestamp=_now())
                    ms = round((time.perf_counter() - t0) * 1000, 3)
                    out.append(ResultRecord(metric="median_osc_upper", value=upper, duration_ms=ms, **common))
                    out.append(ResultRecord(metric="median_osc_lower", value=lower, duration_ms=ms, **common))
                common = dict(experiment="scaling", function_family=fam, n=n, eps=eps, alpha=alpha,
                              trials=config.trials, master_seed=config.master_seed, timestamp=_now(),
                              duration_ms=round((time.perf_counter() - t_start) * 1000, 3))
                out.append(ResultRecord(metric="k_star", value=k_star, **common))
                out.append(ResultRecord(metric="theorem1_k", value=bd.theorem1_k(n, eps), **common))
    return out


# ---------------------------------------------------------------- lemma batteries

LEMMA4_COLUMNS = ("n", "k", "p", "vector", "method", "value", "std_error", "bound", "satisfied",
                  "master_seed", "stream_id")


def random_unit_vectors(n: int, count: int, seed: SeedSpec) -> np.ndarray:
    g = normals(seed, n, np.arange(count))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def run_lemma4(config: ExperimentConfig) -> list[dict]:
    """Exact and Monte Carlo projection moments for ``trials`` random unit vectors per (n, k, p)."""
    config.validate()
    rows = []
    for n in config.n_values:
        for k in config.k_values:
            ps = config.p_values or [(1 + a) * k for a in config.alpha]
            for p in ps:
                stream = stream_id_for("lemma4-verify", n, k, p)
                vs = random_unit_vectors(n, config.trials, SeedSpec(config.master_seed, stream))
                for i, v in enumerate(vs):
                    common = dict(n=n, k=k, p=p, vector=i, master_seed=config.master_seed, stream_id=stream)
                    try:
                        ex = exact_projection_moment(v, k, p)
                        rows.append(dict(common, method=ex.method, value=ex.value, std_error=ex.std_error,
                                         bound=ex.bound, satisfied=ex.satisfied))
                    except ValueError:
                        pass
                    mc = mc_projection_moment(v, k, p, config.samples,
                                              SeedSpec(config.master_seed, stream_id_for(stream, "mc", i)))
                    rows.append(dict(common, method=mc.method, value=mc.value, std_error=mc.std_error,
                                     bound=mc.bound, satisfied=mc.satisfied))
    return rows


MORREY_COLUMNS = ("function_family", "k", "alpha", "mode", "pair", "segment", "R", "p", "c_alpha_k",
                  "rho_qnorm", "bound_value", "empirical_lhs", "std_error", "satisfied", "measured",
                  "master_seed", "stream_id")


def run_morrey(config: ExperimentConfig) -> list[dict]:
    """Chord checks on every segment of random paths, plus the chained bound per pair."""
    config.validate()
    rows = []
    for fn in config.functions:
        fam = canonical_family(fn["family"])
        for k in config.k_values:
            n = max(config.n_values) if config.n_values else k
            n = max(n, k)
            for alpha in config.alpha:
                stream = stream_id_for("morrey-verify", fam, _params_key(fn), k, alpha)
                seed = SeedSpec(config.master_seed, stream)
                f = _prepare_function(fn, n, k, alpha, config.samples, config.master_seed)
                sub = sample_subtori(n, k, seed.substream("sub"), [0])[0]
                pn = restricted_grad_pnorm(f, sub, (1 + alpha) * k, samples=config.samples,
                                           seed=seed.substream("pnorm"))
                ends = uniforms(seed.substream("ends"), 2 * k, np.arange(config.trials))
                for i, e in enumerate(ends):
                    x, y = e[:k], e[k:]
                    mode = config.mode if not (k == 1 and config.mode in ("paper", PAPER)) else EQUAL
                    path = build_path(x, y, mode)
                    common = dict(function_family=fam, k=k, alpha=alpha, mode=path.mode, pair=i,
                                  master_seed=config.master_seed, stream_id=stream)
                    for j in range(path.segments):
                        seg = (path.lifted[j], path.lifted[j + 1])
                        rep = mc_chord_verify(f, sub, seg, alpha, config.samples, seed.at(i).substream("seg", j))
                        rows.append(dict(common, segment=j, R=rep.R, p=rep.p, c_alpha_k=rep.c_alpha_k,
                                         rho_qnorm=rep.rho_qnorm, bound_value=rep.bound_value,
                                         empirical_lhs=rep.empirical_lhs, std_error=rep.std_error,
                                         satisfied=rep.satisfied, measured=rep.measured))
                    ch = chained_osc_bound(f, sub, x, y, alpha, config.samples, seed, mode=path.mode, pnorm=pn)
                    rows.append(dict(common, segment="chain", p=(1 + alpha) * k, bound_value=ch.bound,
                                     empirical_lhs=ch.measured, std_error=ch.std_error,
                                     satisfied=ch.measured <= ch.bound + 4 * ch.std_error, measured=ch.measured))
    return rows


def run_bounds_table(config: ExperimentConfig) -> list[dict]:
    config.validate()
    rows = []
    for n in config.n_values:
        nn = bd.parse_n(str(n))
        for eps in config.eps:
            for alpha in config.alpha:
                for k in (config.k_values or [None]):
                    rows.append(dict(n=str(n), **bd.bounds_table(nn, eps, alpha, k)))
    return rows


# ---------------------------------------------------------------- battery

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class BatteryReport:
    checks: list
    records: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def summary(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}" for c in self.checks]
        lines.append(f"battery: {'PASS' if self.passed else 'FAIL'} ({sum(c.passed for c in self.checks)}"
                     f"/{len(self.checks)} checks)")
        return "\n".join(lines)


def _delta_independent(eps, alpha, k):
    # written out separately from bounds.delta_of on purpose
    return (alpha * eps) / (16.0 * (1.0 + alpha) * k * math.sqrt(k))


def check_lemma_chain(delta_fn=bd.delta_of) -> CheckResult:
    """delta matches its formula and closes the projection-lemma chain: 2 sqrt(k) delta = bound."""
    bad = []
    for eps in (1.0, 0.5, 0.1, 0.01):
        for alpha in (1.0, 0.5, 0.25, 0.05):
            for k in range(1, 9):
                d = delta_fn(eps, alpha, k)
                if not math.isclose(d, _delta_independent(eps, alpha, k), rel_tol=1e-12):
                    bad.append(("delta", eps, alpha, k))
                if not math.isclose(2 * math.sqrt(k) * d, lemma4_bound(eps, alpha, k, 1.0), rel_tol=1e-12):
                    bad.append(("closure", eps, alpha, k))
    return CheckResult("lemma-chain", not bad, f"{len(bad)} violations" + (f", first {bad[0]}" if bad else ""))


def check_hypergeometric(n_max: int = 50, k_max: int = 5) -> CheckResult:
    bad = 0
    count = 0
    for n in range(1, n_max + 1):
        for k in range(1, min(k_max, n) + 1):
            for m in range(0, n - k + 1):
                exact = bd.avoid_probability(n, k, m)
                step1 = (1 - Fraction(m, n - k + 1)) ** k
                step2 = 1 - Fraction(k * m, n - k + 1)
                count += 1
                if not (exact >= step1 >= step2):
                    bad += 1
    return CheckResult("hypergeometric-chain", bad == 0, f"{count} tuples, {bad} violations")


def random_admissible_tuples(count: int, seed: SeedSpec, log_n_range=(1.0, 1e4)) -> list[tuple]:
    """(LogN, eps, alpha, k) with k the max admissible dimension, skipping k = 0 draws."""
    u = uniforms(seed, 3, np.arange(count))
    out = []
    lo, hi = log_n_range
    for a, b, c in u:
        ln = bd.LogN(lo + (hi - lo) * a)
        eps, alpha = 1.0 - b, 1.0 - c  # (0, 1]
        k = bd.max_admissible_k(ln, eps, alpha)
        out.append((ln, eps, alpha, k))
    return out


def check_lemma1_sweep(count: int, seed: SeedSpec, delta_fn=bd.delta_of) -> CheckResult:
    tuples = random_admissible_tuples(count, seed)
    tested = bad = 0
    for ln, eps, alpha, k in tuples:
        if k < 1:
            continue
        tested += 1
        if not bd.check_lemma1(ln, eps, alpha, k, delta_fn=delta_fn).holds:
            bad += 1
    return CheckResult("lemma1-log-space", bad == 0, f"{tested} admissible tuples, {bad} violations")


def check_projection_agreement(samples: int, seed: SeedSpec, vectors: int = 20) -> CheckResult:
    agree = total = 0
    for p in (2.0, 4.0, 6.0):
        vs = random_unit_vectors(12, vectors, seed.substream("v", p))
        for i, v in enumerate(vs):
            ex = exact_projection_moment(v, 3, p)
            mc = mc_projection_moment(v, 3, p, samples, seed.substream("mc", p, i))
            total += 1
            agree += abs(mc.value - ex.value) <= 4 * mc.std_error
    return CheckResult("projection-exact-vs-mc", agree >= 0.95 * total, f"{agree}/{total} within 4 sigma")


def check_split_bound(seed: SeedSpec, delta_fn=bd.delta_of) -> CheckResult:
    bad = total = 0
    for n, k in ((8, 2), (10, 3), (12, 3)):
        for alpha in (0.5, 1.0):
            p = (1 + alpha) * k
            delta = delta_fn(1.0, alpha, k)
            for v in random_unit_vectors(n, 5, seed.substream(n, k, alpha)):
                ex = exact_projection_moment(v, k, p)
                total += 1
                lhs = ex.mean_power
                if lhs > split_bound(v, k, p, delta) + 1e-12:
                    bad += 1
                a, b = 2 * k / (delta ** 2 * n), (k * delta ** 2) ** (p / 2)
                if (a + b) ** (1 / p) > a ** (1 / p) + b ** (1 / p) + 1e-12:
                    bad += 1
    return CheckResult("projection-split-bound", bad == 0, f"{total} vectors, {bad} violations")


def check_density(samples: int, seed: SeedSpec) -> CheckResult:
    notes, ok = [], True
    for k in (2, 3):
        for alpha in (0.5, 1.0):
            c = density_identity_mc(k, alpha, samples, seed.substream(k, alpha))
            ok &= abs(c.z_closed) <= 4
            if k == 3:
                ok &= abs(c.z_printed) > 5
            notes.append(f"k={k},a={alpha}: z={c.z_closed:+.2f}")
    for k in range(1, 11):
        for alpha in (0.25, 0.5, 1.0):
            ok &= density_qnorm(k, alpha).within_bound
    return CheckResult("morrey-density", bool(ok), "; ".join(notes))


def check_paths(count: int, seed: SeedSpec) -> CheckResult:
    bad = 0
    for k in range(1, 7):
        pts = uniforms(seed.substream(k), 2 * k, np.arange(count))
        for mode in (EQUAL, PAPER):
            if mode == PAPER and k == 1:
                continue
            for e in pts:
                path = build_path(e[:k], e[k:], mode)
                bad += bool(path_violations(path, e[:k], e[k:]))
    return CheckResult("paths", bad == 0, f"{bad} invalid paths")


def check_morrey_chords(samples: int, seed: SeedSpec) -> CheckResult:
    fns = [
        {"family": "dist-to-point", "params": {"x0": "random", "seed": 1}},
        {"family": "smoothed-distance", "params": {"x0": "random", "smoothing": 0.05, "seed": 2}},
        {"family": "trig-poly", "params": {"random_terms": 3, "support": 2, "max_freq": 2, "seed": 3}},
        {"family": "max-sawtooth", "params": {"axes": [0, 1]}},
    ]
    bad = total = 0
    for fi, fn in enumerate(fns):
        for k in (2, 3):
            f = from_template(fn["family"], fn["params"], k)
            sub = SubtorusSpec(k, tuple(range(k)))
            e = uniforms(seed.substream(fi, k), 2 * k, [0])[0]
            path = build_path(e[:k], e[k:], EQUAL)
            for j in range(path.segments):
                rep = mc_chord_verify(f, sub, (path.lifted[j], path.lifted[j + 1]), 1.0, samples,
                                      seed.substream(fi, k, j))
                total += 1
                bad += not rep.satisfied
    return CheckResult("morrey-chords", bad == 0, f"{total} segments, {bad} violations")


def run_battery(config: ExperimentConfig | None = None, *, inject_bug: bool = False) -> BatteryReport:
    """Run every verification battery; ``inject_bug`` perturbs delta by 10% as a mutation test."""
    master = config.master_seed if config else 0
    samples = config.samples if config and config.samples else 20_000
    seed = SeedSpec(master, stream_id_for("battery"))
    delta_fn = (lambda e, a, k: 1.1 * bd.delta_of(e, a, k)) if inject_bug else bd.delta_of
    checks = []
    records = []
    for name, fn in (
        ("lemma-chain", lambda: check_lemma_chain(delta_fn)),
        ("hypergeometric", lambda: check_hypergeometric(30, 5)),
        ("lemma1", lambda: check_lemma1_sweep(2000, seed.substream("lemma1"), delta_fn)),
        ("projection", lambda: check_projection_agreement(samples, seed.substream("proj"), 10)),
        ("split", lambda: check_split_bound(seed.substream("split"), delta_fn)),
        ("density", lambda: check_density(max(samples, 20_000), seed.substream("density"))),
        ("paths", lambda: check_paths(200, seed.substream("paths"))),
        ("chords", lambda: check_morrey_chords(min(samples, 5000), seed.substream("chords"))),
    ):
        t0 = time.perf_counter()
        res = fn()
        checks.append(res)
        records.append(ResultRecord(experiment="battery", metric=res.name, value=float(res.passed),
                                    master_seed=master, stream_id=seed.stream_id,
                                    duration_ms=round((time.perf_counter() - t0) * 1000, 3), timestamp=_now()))
    return BatteryReport(checks, records)
