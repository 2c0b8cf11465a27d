"""Versioned JSON documents for instances, matchings, strategies, preferences.

Every document carries "format" and "version" fields. Floats are written
with Python's shortest round-trip repr, so read(write(x)) is lossless at
full double precision. Parse failures raise FormatError with the offending
path and field; I/O failures propagate as OSError.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError
from .market import AgentId, Generator, MarketInstance, Matching, PreferenceProfile, Side

FORMAT_VERSION = 1
INSTANCE_FORMAT = "market-instance"
MATCHING_FORMAT = "matching"
STRATEGY_FORMAT = "strategy-profile"
PREFERENCES_FORMAT = "preferences"
REPORT_FORMAT = "instability-report"


def _dump(document: dict, path) -> None:
    Path(path).write_text(json.dumps(document, indent=2) + "\n")


def _load(path, expected_format: str) -> dict:
    text = Path(path).read_text()
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise FormatError(f"{path}: top level must be a JSON object")
    if document.get("format") != expected_format:
        raise FormatError(
            f"{path}: field 'format' is {document.get('format')!r}, expected {expected_format!r}"
        )
    if document.get("version") != FORMAT_VERSION:
        raise FormatError(
            f"{path}: field 'version' is {document.get('version')!r}, "
            f"expected {FORMAT_VERSION}"
        )
    return document


def _field(document: dict, path, name: str):
    if name not in document:
        raise FormatError(f"{path}: missing field {name!r}")
    return document[name]


def write_instance(instance: MarketInstance, path) -> None:
    _dump(
        {
            "format": INSTANCE_FORMAT,
            "version": FORMAT_VERSION,
            "p": instance.p,
            "a": instance.a,
            "m": instance.m,
            "k": instance.k,
            "games": instance.games.tolist(),
            "outside_options": {
                "left": instance.left_outside.tolist(),
                "right": instance.right_outside.tolist(),
            },
            "generator": instance.generator.value if instance.generator else None,
            "seed": instance.seed,
        },
        path,
    )


def read_instance(path) -> MarketInstance:
    document = _load(path, INSTANCE_FORMAT)
    outside = _field(document, path, "outside_options")
    if not isinstance(outside, dict):
        raise FormatError(f"{path}: field 'outside_options' must be an object")
    generator_name = document.get("generator")
    generator = None
    if generator_name is not None:
        try:
            generator = Generator(generator_name)
        except ValueError:
            raise FormatError(f"{path}: unknown generator {generator_name!r}") from None
    try:
        return MarketInstance(
            p=int(_field(document, path, "p")),
            a=int(_field(document, path, "a")),
            m=int(_field(document, path, "m")),
            k=int(_field(document, path, "k")),
            games=np.asarray(_field(document, path, "games"), dtype=float),
            left_outside=np.asarray(_field(outside, path, "left"), dtype=float),
            right_outside=np.asarray(_field(outside, path, "right"), dtype=float),
            generator=generator,
            seed=document.get("seed"),
        )
    except (InputError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from exc


def write_matching(matching: Matching, path) -> None:
    _dump(
        {
            "format": MATCHING_FORMAT,
            "version": FORMAT_VERSION,
            "pairs": [list(pair) for pair in matching.pairs],
        },
        path,
    )


def read_matching(path) -> Matching:
    document = _load(path, MATCHING_FORMAT)
    pairs = _field(document, path, "pairs")
    try:
        return Matching(tuple((int(i), int(j)) for i, j in pairs))
    except (InputError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad 'pairs' entry: {exc}") from exc


def write_strategy_profile(strategies: dict, path) -> None:
    left = {
        str(agent.index): np.asarray(vec, dtype=float).tolist()
        for agent, vec in strategies.items()
        if agent.side is Side.LEFT
    }
    right = {
        str(agent.index): np.asarray(vec, dtype=float).tolist()
        for agent, vec in strategies.items()
        if agent.side is Side.RIGHT
    }
    _dump(
        {
            "format": STRATEGY_FORMAT,
            "version": FORMAT_VERSION,
            "left": left,
            "right": right,
        },
        path,
    )


def read_strategy_profile(path) -> dict:
    document = _load(path, STRATEGY_FORMAT)
    out: dict = {}
    for side_name, make in (("left", AgentId.left), ("right", AgentId.right)):
        table = _field(document, path, side_name)
        if not isinstance(table, dict):
            raise FormatError(f"{path}: field {side_name!r} must be an object")
        for key, vec in table.items():
            try:
                agent = make(int(key))
                out[agent] = np.asarray(vec, dtype=float)
            except (InputError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}: bad strategy for {side_name} agent {key!r}: {exc}") from exc
            if out[agent].ndim != 1:
                raise FormatError(f"{path}: strategy for {side_name} agent {key!r} must be a vector")
    return out


def write_preferences(prefs: PreferenceProfile, path) -> None:
    _dump(
        {
            "format": PREFERENCES_FORMAT,
            "version": FORMAT_VERSION,
            "left": [list(lst) for lst in prefs.left],
            "right": [list(lst) for lst in prefs.right],
            "left_threshold": list(prefs.left_threshold),
            "right_threshold": list(prefs.right_threshold),
        },
        path,
    )


def read_preferences(path) -> PreferenceProfile:
    document = _load(path, PREFERENCES_FORMAT)
    left = _field(document, path, "left")
    right = _field(document, path, "right")
    left_threshold = document.get("left_threshold") or [0.0] * len(left)
    right_threshold = document.get("right_threshold") or [0.0] * len(right)
    try:
        return PreferenceProfile(
            left=tuple(tuple(int(j) for j in lst) for lst in left),
            right=tuple(tuple(int(i) for i in lst) for lst in right),
            left_threshold=tuple(float(v) for v in left_threshold),
            right_threshold=tuple(float(v) for v in right_threshold),
        )
    except (InputError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad preference lists: {exc}") from exc


def write_report(record: dict, path) -> None:
    if record.get("format") != REPORT_FORMAT:
        raise InputError("write_report expects an instability report record")
    _dump(record, path)
