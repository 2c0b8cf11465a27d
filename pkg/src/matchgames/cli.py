"""Command-line interface.

Exit codes: 0 on success, 2 for malformed input or documents, 3 for I/O
failures. Subcommand output goes to stdout as JSON records; diagnostics go
to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import InputError
from .experiments import (
    ExperimentConfig,
    OUTPUT_DIR_ENV,
    audit,
    run_experiment,
    theoretical_bound,
)
from .formats import (
    FORMAT_VERSION,
    MATCHING_FORMAT,
    read_preferences,
    write_instance,
    write_matching,
    write_report,
)
from .games import solve_game
from .learning import Policy
from .market import Generator, Side, deferred_acceptance, generate_instance

_CONFIG_KEYS = {
    "p": int,
    "a": int,
    "m": int,
    "k": int,
    "T": int,
    "runs": int,
    "seeds_base": int,
    "policy": str,
    "generator": str,
    "outside_option": float,
    "delta": object,
    "noise_scale": float,
    "output_dir": str,
    "workers": int,
}


def _print(record: dict) -> None:
    print(json.dumps(record, indent=2))


def _parse_delta(raw) -> float | None:
    if raw is None or raw == "auto":
        return None
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise InputError(f"delta must be a number or 'auto', got {raw!r}") from None


def _load_config_file(path) -> dict:
    try:
        document = json.loads(open(path).read())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise InputError(f"{path}: config must be a JSON object")
    unknown = set(document) - set(_CONFIG_KEYS)
    if unknown:
        raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
    return document


def _cmd_simulate(args) -> int:
    file_config = _load_config_file(args.config) if args.config else {}

    def setting(key, default=None):
        flag = getattr(args, key)
        return flag if flag is not None else file_config.get(key, default)

    for key in ("p", "a", "m", "k", "T"):
        if setting(key) is None:
            raise InputError(f"missing required setting {key!r} (flag or config file)")
    config = ExperimentConfig(
        p=int(setting("p")),
        a=int(setting("a")),
        m=int(setting("m")),
        k=int(setting("k")),
        T=int(setting("T")),
        runs=int(setting("runs", 50)),
        seeds_base=int(setting("seeds_base", 0)),
        policy=Policy(setting("policy", Policy.SELF_PLAY.value)),
        generator=Generator(setting("generator", Generator.GAUSSIAN_UNIT.value)),
        outside_option=float(setting("outside_option", -1.0)),
        delta=_parse_delta(setting("delta")),
        noise_scale=float(setting("noise_scale", 1.0)),
        output_dir=setting("output_dir"),
        workers=None if setting("workers") is None else int(setting("workers")),
    )
    trace = run_experiment(config)
    _print(
        {
            "runs": config.runs,
            "T": config.T,
            "final_mean_cum_mi": float(trace.mean[-1]),
            "final_bound": float(trace.bound[-1]),
        }
    )
    return 0


def _cmd_gen_instance(args) -> int:
    instance = generate_instance(
        args.p,
        args.a,
        args.m,
        args.k,
        generator=Generator(args.generator),
        outside_option=args.outside_option,
        seed=args.seed,
    )
    write_instance(instance, args.output)
    return 0


def _cmd_solve_game(args) -> int:
    if (args.matrix is None) == (args.file is None):
        raise InputError("provide exactly one of --matrix or --file")
    if args.matrix is not None:
        try:
            payload = json.loads(args.matrix)
        except json.JSONDecodeError as exc:
            raise InputError(f"--matrix is not valid JSON: {exc.msg}") from exc
    else:
        try:
            payload = json.loads(open(args.file).read())
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.file}: line {exc.lineno}: {exc.msg}") from exc
    try:
        matrix = np.asarray(payload, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"payoff matrix is not numeric: {exc}") from exc
    solution = solve_game(matrix)
    _print(
        {
            "format": "game-solution",
            "version": FORMAT_VERSION,
            "value": solution.value,
            "row_strategy": solution.row_strategy.tolist(),
            "column_strategy": solution.column_strategy.tolist(),
        }
    )
    return 0


def _cmd_match(args) -> int:
    prefs = read_preferences(args.preferences)
    side = Side.LEFT if args.proposing_side == "left" else Side.RIGHT
    matching = deferred_acceptance(prefs, side)
    document = {
        "format": MATCHING_FORMAT,
        "version": FORMAT_VERSION,
        "pairs": [list(pair) for pair in matching.pairs],
    }
    if args.output:
        write_matching(matching, args.output)
    _print(document)
    return 0


def _cmd_bound(args) -> int:
    _print(
        {
            "t": args.t,
            "bound": theoretical_bound(args.t, args.p, args.a, args.m, args.k),
        }
    )
    return 0


def _cmd_audit(args) -> int:
    report = audit(args.instance, args.matching, args.strategies)
    record = report.to_record()
    if args.output:
        write_report(record, args.output)
    _print(record)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchgames",
        description="Matching markets with zero-sum pair games: solve, match, audit, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a learning experiment and write trace files")
    for key in ("p", "a", "m", "k", "T", "runs", "seeds-base", "workers"):
        sim.add_argument(f"--{key}", type=int, dest=key.replace("-", "_"))
    sim.add_argument("--policy", choices=[policy.value for policy in Policy])
    sim.add_argument("--generator", choices=[gen.value for gen in Generator])
    sim.add_argument("--outside-option", type=float, dest="outside_option")
    sim.add_argument("--delta", help="confidence level in (0,1) or 'auto'")
    sim.add_argument("--noise-scale", type=float, dest="noise_scale")
    sim.add_argument("--output-dir", dest="output_dir", help=f"defaults to ${OUTPUT_DIR_ENV}")
    sim.add_argument("--config", help="JSON file with the same keys; flags win")
    sim.set_defaults(func=_cmd_simulate)

    gen = sub.add_parser("gen-instance", help="draw a random market instance file")
    for key in ("p", "a", "m", "k"):
        gen.add_argument(f"--{key}", type=int, required=True)
    gen.add_argument("--generator", choices=[g.value for g in Generator],
                     default=Generator.GAUSSIAN_UNIT.value)
    gen.add_argument("--outside-option", type=float, dest="outside_option", default=-1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", required=True)
    gen.set_defaults(func=_cmd_gen_instance)

    solve = sub.add_parser("solve-game", help="solve one zero-sum matrix game")
    solve.add_argument("--matrix", help="payoff matrix as inline JSON rows")
    solve.add_argument("--file", help="path to a JSON file holding the matrix")
    solve.set_defaults(func=_cmd_solve_game)

    match = sub.add_parser("match", help="run deferred acceptance on a preferences file")
    match.add_argument("--preferences", required=True)
    match.add_argument("--proposing-side", choices=("left", "right"), default="left",
                       dest="proposing_side")
    match.add_argument("--output")
    match.set_defaults(func=_cmd_match)

    bound = sub.add_parser("bound", help="print the theoretical cumulative instability bound")
    for key in ("t", "p", "a", "m", "k"):
        bound.add_argument(f"--{key}", type=int, required=True)
    bound.set_defaults(func=_cmd_bound)

    aud = sub.add_parser("audit", help="score a matching and strategy profile against an instance")
    aud.add_argument("--instance", required=True)
    aud.add_argument("--matching", required=True)
    aud.add_argument("--strategies", required=True)
    aud.add_argument("--output")
    aud.set_defaults(func=_cmd_audit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())
