"""Experiment harness: repeated learning runs, trace files, and aggregates.

Each run draws a fresh instance (seed = seeds_base + run index), plays one
episode, and writes a per-run CSV trace. The aggregate file carries the
mean and population standard deviation of cumulative instability across
runs plus the theoretical guarantee. All file content is a deterministic
function of the configuration, independent of worker scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError
from .formats import read_instance, read_matching, read_strategy_profile
from .instability import InstabilityReport, matching_instability
from .learning import Policy, run_episode
from .market import Generator, Matching, generate_instance

OUTPUT_DIR_ENV = "MATCHGAMES_OUTPUT_DIR"
TRACE_HEADER = ("run_id", "t", "matching_serialized", "mi", "cumulative_mi", "event_ok")
AGGREGATE_HEADER = ("t", "mean_cum_mi", "std_cum_mi", "bound")
CONFIG_FILENAME = "config.json"
AGGREGATE_FILENAME = "aggregate.csv"


def theoretical_bound(t: int, p: int, a: int, m: int, k: int) -> float:
    """Worst-case cumulative instability guarantee after t rounds."""
    for name, value in (("t", t), ("p", p), ("a", a), ("m", m), ("k", k)):
        if int(value) != value or value < 1:
            raise InputError(f"{name} must be a positive integer, got {value!r}")
    t, p, a, m, k = int(t), int(p), int(a), int(m), int(k)
    return 2.0 * math.sqrt(4.0 * t * m * k * p * a * math.log(4.0 * t * t * m * k * p * p * a * a)) + 2.0


@dataclass(frozen=True)
class ExperimentConfig:
    p: int
    a: int
    m: int
    k: int
    T: int
    runs: int = 50
    seeds_base: int = 0
    policy: Policy = Policy.SELF_PLAY
    generator: Generator = Generator.GAUSSIAN_UNIT
    outside_option: float = -1.0
    delta: float | None = None
    noise_scale: float = 1.0
    output_dir: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if min(self.p, self.a, self.m, self.k) < 1:
            raise InputError("market dimensions must all be at least 1")
        if self.T < 1 or self.runs < 1:
            raise InputError("T and runs must be at least 1")
        if self.delta is not None and not (0.0 < self.delta < 1.0):
            raise InputError(f"delta must lie strictly inside (0, 1), got {self.delta!r}")
        if self.noise_scale < 0.0 or not math.isfinite(self.noise_scale):
            raise InputError(f"noise_scale must be finite and nonnegative, got {self.noise_scale!r}")
        if not isinstance(self.policy, Policy):
            raise InputError(f"unknown policy {self.policy!r}")
        if not isinstance(self.generator, Generator):
            raise InputError(f"unknown generator {self.generator!r}")
        if self.workers is not None and self.workers < 1:
            raise InputError(f"workers must be at least 1, got {self.workers!r}")

    def record(self) -> dict:
        """Scientific parameters only; echoing this is scheduling-independent."""
        return {
            "format": "experiment-config",
            "version": 1,
            "p": self.p,
            "a": self.a,
            "m": self.m,
            "k": self.k,
            "T": self.T,
            "runs": self.runs,
            "seeds_base": self.seeds_base,
            "policy": self.policy.value,
            "generator": self.generator.value,
            "outside_option": self.outside_option,
            "delta": self.delta,
            "noise_scale": self.noise_scale,
        }


@dataclass(frozen=True)
class RegretTrace:
    """Cumulative instability per run plus cross-run aggregates."""

    config: ExperimentConfig
    cumulative: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    bound: np.ndarray


def _serialize_matching(matching: Matching) -> str:
    return ";".join(f"{i}-{j}" for i, j in matching.pairs)


def parse_matching_field(field: str) -> Matching:
    if not field:
        return Matching(())
    try:
        pairs = tuple(tuple(int(x) for x in chunk.split("-")) for chunk in field.split(";"))
        return Matching(pairs)
    except (InputError, ValueError) as exc:
        raise FormatError(f"bad matching field {field!r}: {exc}") from exc


def run_trace_path(output_dir, run_index: int) -> Path:
    return Path(output_dir) / f"run_{run_index:03d}.csv"


def _single_run(config: ExperimentConfig, run_index: int, output_dir: str) -> np.ndarray:
    """Play one run, write its trace file, return cumulative instability."""
    seed = config.seeds_base + run_index
    instance = generate_instance(
        config.p,
        config.a,
        config.m,
        config.k,
        generator=config.generator,
        outside_option=config.outside_option,
        seed=seed,
    )
    records = run_episode(
        instance,
        config.policy,
        config.T,
        delta=config.delta,
        seed=seed,
        noise_scale=config.noise_scale,
    )
    cumulative = np.cumsum([record.mi for record in records])
    with open(run_trace_path(output_dir, run_index), "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for record, total in zip(records, cumulative):
            writer.writerow(
                (
                    run_index,
                    record.t,
                    _serialize_matching(record.matching),
                    repr(float(record.mi)),
                    repr(float(total)),
                    int(record.event_ok),
                )
            )
    return cumulative


def _single_run_star(args: tuple) -> np.ndarray:
    return _single_run(*args)


def resolve_output_dir(configured: str | None) -> Path:
    raw = configured or os.environ.get(OUTPUT_DIR_ENV)
    if not raw:
        raise InputError(
            f"no output directory configured; set output_dir or the {OUTPUT_DIR_ENV} variable"
        )
    return Path(raw)


def run_experiment(config: ExperimentConfig) -> RegretTrace:
    """Run all configured repetitions and write traces plus the aggregate."""
    output_dir = resolve_output_dir(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    workers = config.workers if config.workers is not None else (os.cpu_count() or 1)
    workers = max(1, min(workers, config.runs))
    tasks = [(config, run_index, str(output_dir)) for run_index in range(config.runs)]
    if workers == 1:
        cumulative_rows = [_single_run_star(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cumulative_rows = list(pool.map(_single_run_star, tasks))
    cumulative = np.vstack(cumulative_rows)
    mean = cumulative.mean(axis=0)
    std = cumulative.std(axis=0)
    bound = np.array(
        [theoretical_bound(t, config.p, config.a, config.m, config.k) for t in range(1, config.T + 1)]
    )
    with open(output_dir / AGGREGATE_FILENAME, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(AGGREGATE_HEADER)
        for t in range(config.T):
            writer.writerow(
                (t + 1, repr(float(mean[t])), repr(float(std[t])), repr(float(bound[t])))
            )
    (output_dir / CONFIG_FILENAME).write_text(json.dumps(config.record(), indent=2) + "\n")
    return RegretTrace(config=config, cumulative=cumulative, mean=mean, std=std, bound=bound)


def read_trace_file(path) -> list[dict]:
    """Parse one per-run trace CSV back into typed records."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader, ()))
        if header != TRACE_HEADER:
            raise FormatError(f"{path}: unexpected trace header {header!r}")
        rows = []
        for row in reader:
            if len(row) != len(TRACE_HEADER):
                raise FormatError(f"{path}: malformed row {row!r}")
            rows.append(
                {
                    "run_id": int(row[0]),
                    "t": int(row[1]),
                    "matching": parse_matching_field(row[2]),
                    "mi": float(row[3]),
                    "cumulative_mi": float(row[4]),
                    "event_ok": bool(int(row[5])),
                }
            )
    return rows


def read_aggregate_file(path) -> list[dict]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader, ()))
        if header != AGGREGATE_HEADER:
            raise FormatError(f"{path}: unexpected aggregate header {header!r}")
        return [
            {
                "t": int(row[0]),
                "mean_cum_mi": float(row[1]),
                "std_cum_mi": float(row[2]),
                "bound": float(row[3]),
            }
            for row in reader
        ]


def audit(instance_path, matching_path, strategies_path) -> InstabilityReport:
    """Audit an outcome on disk: parse, cross-validate, and score it."""
    instance = read_instance(instance_path)
    matching = read_matching(matching_path)
    strategies = read_strategy_profile(strategies_path)
    matching.validate_for(instance.p, instance.a)
    return matching_instability(instance, matching, strategies)
