"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from .errors import ConfigError, TorusOscError
from .harness import (
    LEMMA4_COLUMNS,
    MORREY_COLUMNS,
    ExperimentConfig,
    records_to_csv,
    records_to_json,
    run_battery,
    run_bounds_table,
    run_lemma4,
    run_morrey,
    run_scaling,
    run_theorem_verify,
)
from .oscillation import grid_osc, refine_osc
from .sampling import SeedSpec, sample_subtorus, stream_id_for
from .torus import SubtorusSpec
from .zoo import canonical_family, from_template, zoo_listing

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _split_top(text: str, sep: str = ",") -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch in "[{":
            depth += 1
        elif ch in "]}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        parts.append(cur)
    return parts


def parse_function_spec(text: str) -> dict:
    """``{"family": ..., "params": {...}}``, ``@file.json`` or ``family:key=value,key=[..]``."""
    text = text.strip()
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    if text.startswith("{"):
        spec = json.loads(text)
        return {"family": canonical_family(spec["family"]), "params": spec.get("params", {})}
    family, _, rest = text.partition(":")
    params = {}
    for item in _split_top(rest):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"bad parameter {item!r}; expected key=value")
        try:
            params[key.strip()] = json.loads(val)
        except json.JSONDecodeError:
            params[key.strip()] = val.strip()
    return {"family": canonical_family(family.strip()), "params": params}


def parse_subtorus(text: str, n: int, k: int | None, seed: SeedSpec) -> SubtorusSpec:
    if text == "random":
        if k is None:
            raise ConfigError("--subtorus random needs --k")
        return sample_subtorus(n, k, seed)
    spec = json.loads(text)
    return SubtorusSpec(n, tuple(spec["free_axes"]), spec.get("base"))


def _common(parser: argparse.ArgumentParser, suppress: bool):
    # sub-commands suppress defaults so flags given before the command survive
    d = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d, help="master seed (u64, default 0)")
    g.add_argument("--config", default=d, help="JSON experiment config")
    g.add_argument("--out", default=d, help="write machine-readable output here")
    g.add_argument("--format", choices=("csv", "json"), default=d, help="default csv")
    g.add_argument("--threads", type=int, default=d, help="worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torusosc", description=__doc__.splitlines()[0])
    _common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p, suppress=True)
        return p

    p = cmd("bounds", "parameter arithmetic and the lemma inequalities in log space")
    p.add_argument("--n", required=True, help="integer or log:<value>")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int)

    z = cmd("zoo", "function catalog")
    z.add_argument("action", choices=("list",))

    p = cmd("osc", "certified oscillation of a function on a subtorus")
    p.add_argument("--function", required=True)
    p.add_argument("--subtorus", default="random", help="'random' or JSON {free_axes, base}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int, default=32)
    p.add_argument("--refine", action="store_true")
    p.add_argument("--gap", type=float, default=1e-3)
    p.add_argument("--budget", type=int, default=200_000)

    for name in ("theorem-verify", "scaling"):
        p = cmd(name, "success fractions over random subtori" if name == "theorem-verify"
                else "empirical k*(n, eps) curve")
        p.add_argument("--function", action="append")
        p.add_argument("--n", type=int, action="append")
        p.add_argument("--k", type=int, action="append")
        p.add_argument("--eps", type=float, action="append")
        p.add_argument("--alpha", type=float, action="append")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--samples", type=int, default=5000)
        p.add_argument("--m", type=int, default=32)
        p.add_argument("--no-refine", action="store_true")

    p = cmd("lemma4-verify", "projection moments: exact enumeration vs Monte Carlo")
    p.add_argument("--n", type=int, action="append")
    p.add_argument("--k", type=int, action="append")
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--vectors", type=int, default=20)

    p = cmd("morrey-verify", "chord and chained Morrey bounds on random paths")
    p.add_argument("--function", action="append")
    p.add_argument("--k", type=int, action="append")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float, action="append")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--pairs", type=int, default=5)
    p.add_argument("--mode", choices=("equal", "paper"), default="equal")

    p = cmd("battery", "run every verification battery")
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--inject-bug", action="store_true", help="perturb delta by 10%% to test detection")
    return ap


def _emit(text: str, args) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_rows(rows, columns, args) -> None:
    text = records_to_json(rows) if args.format == "json" else records_to_csv(rows, columns)
    _emit(text, args)


def _load_config(args, experiment: str) -> ExperimentConfig | None:
    if not args.config:
        return None
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    if cfg.experiment != experiment:
        raise ConfigError(f"config is for {cfg.experiment!r}, not {experiment!r}")
    # explicit global flags win over the file
    given = args.explicit
    if given["seed"] is not None:
        cfg.master_seed = given["seed"]
    if given["threads"] is not None:
        cfg.threads = given["threads"]
    if given["format"] is not None:
        cfg.format = given["format"]
    cfg.validate()
    if cfg.output and not args.out:
        args.out = cfg.output
    args.format = cfg.format
    return cfg


def _cmd_bounds(args) -> int:
    row = bd.bounds_table(bd.parse_n(args.n), args.eps, args.alpha, args.k)
    width = max(len(k) for k in row)
    for key, val in row.items():
        print(f"{key:<{width}}  {val}")
    print()
    rec = dict(n=args.n, **row)
    if args.format == "json":
        text = json.dumps(rec) + "\n"
    else:
        text = records_to_csv([rec], tuple(rec))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_zoo(args) -> int:
    for row in zoo_listing():
        print(f"{row['family']:<20} ({row['alias']})  L = {row['lipschitz']:<24} params: {row['params']}")
    return EXIT_OK


def _cmd_osc(args) -> int:
    spec = parse_function_spec(args.function)
    f = from_template(spec["family"], spec["params"], args.n)
    seed = SeedSpec(args.seed, stream_id_for("osc", args.n, args.k))
    sub = parse_subtorus(args.subtorus, args.n, args.k, seed)
    cert = refine_osc(f, sub, args.gap, args.budget) if args.refine else grid_osc(f, sub, args.m)
    row = dict(function_family=f.family, n=args.n, k=sub.k, free_axes=" ".join(map(str, sub.free_axes)),
               **cert.as_row(), master_seed=args.seed, stream_id=seed.stream_id)
    _emit_rows([row], tuple(row), args)
    return EXIT_OK


def _flag_config(args, experiment: str) -> ExperimentConfig:
    fns = [parse_function_spec(s) for s in (args.function or [])]
    cfg = dict(experiment=experiment, functions=fns, n_values=args.n or [], k_values=args.k or [],
               alpha=args.alpha or [1.0], samples=args.samples, master_seed=args.seed,
               format=args.format, threads=args.threads)
    if experiment in ("theorem-verify", "scaling"):
        cfg.update(eps=args.eps or [], trials=args.trials, grid_m=args.m, refine=not args.no_refine)
    return ExperimentConfig.from_dict(cfg)


def _cmd_experiment(args) -> int:
    cfg = _load_config(args, args.command) or _flag_config(args, args.command)
    records = run_theorem_verify(cfg) if args.command == "theorem-verify" else run_scaling(cfg)
    _emit(records_to_json(records) if args.format == "json" else records_to_csv(records), args)
    return EXIT_OK


def _cmd_lemma4(args) -> int:
    cfg = _load_config(args, "lemma4-verify")
    if cfg is None:
        cfg = ExperimentConfig.from_dict(dict(
            experiment="lemma4-verify", n_values=args.n or [12], k_values=args.k or [3],
            p_values=args.p or [], samples=args.samples, trials=args.vectors, master_seed=args.seed,
            format=args.format, threads=args.threads))
    rows = run_lemma4(cfg)
    _emit_rows(rows, LEMMA4_COLUMNS, args)
    return EXIT_OK


def _cmd_morrey(args) -> int:
    cfg = _load_config(args, "morrey-verify")
    if cfg is None:
        fns = [parse_function_spec(s) for s in (args.function or ["dist-to-point:x0=\"random\""])]
        cfg = ExperimentConfig.from_dict(dict(
            experiment="morrey-verify", functions=fns, k_values=args.k or [2], n_values=[args.n] if args.n else [],
            alpha=args.alpha or [1.0], samples=args.samples, trials=args.pairs, mode=args.mode,
            master_seed=args.seed, format=args.format, threads=args.threads))
    rows = run_morrey(cfg)
    _emit_rows(rows, MORREY_COLUMNS, args)
    return EXIT_OK if all(r["satisfied"] for r in rows) else EXIT_FAIL


def _cmd_battery(args) -> int:
    cfg = _load_config(args, "battery")
    if cfg is None:
        cfg = ExperimentConfig(experiment="battery", master_seed=args.seed, samples=args.samples)
    report = run_battery(cfg, inject_bug=args.inject_bug)
    print(report.summary(), file=sys.stderr if args.out is None else sys.stdout)
    _emit(records_to_json(report.records) if args.format == "json" else records_to_csv(report.records), args)
    return report.exit_status


COMMANDS = {
    "bounds": _cmd_bounds,
    "zoo": _cmd_zoo,
    "osc": _cmd_osc,
    "theorem-verify": _cmd_experiment,
    "scaling": _cmd_experiment,
    "lemma4-verify": _cmd_lemma4,
    "morrey-verify": _cmd_morrey,
    "battery": _cmd_battery,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.explicit = {k: getattr(args, k) for k in ("seed", "format", "threads")}
    for key, default in (("seed", 0), ("format", "csv"), ("threads", 1)):
        if getattr(args, key) is None:
            setattr(args, key, default)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, TorusOscError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
