"""Command-line interface: exit codes, JSON output, config merging."""

import json
import subprocess
import sys

import pytest
from conftest import build_example_market, build_example_profile

from matchgames.cli import entry, main
from matchgames.formats import (
    read_instance,
    write_instance,
    write_matching,
    write_preferences,
    write_strategy_profile,
)
from matchgames.market import Matching, PreferenceProfile


@pytest.fixture
def audit_files(tmp_path):
    instance_path = tmp_path / "instance.json"
    matching_path = tmp_path / "matching.json"
    strategies_path = tmp_path / "strategies.json"
    write_instance(build_example_market(), instance_path)
    write_matching(Matching(((0, 0), (1, 1))), matching_path)
    write_strategy_profile(build_example_profile(), strategies_path)
    return str(instance_path), str(matching_path), str(strategies_path)


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == 2
    capsys.readouterr()


def test_bound_prints_frozen_value(capsys):
    assert main(["bound", "--t", "1", "--p", "1", "--a", "1", "--m", "1", "--k", "1"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record == {"t": 1, "bound": 6.709640090061899}


def test_solve_game_inline_matrix(capsys):
    assert main(["solve-game", "--matrix", "[[1,-1],[-1,1]]"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["value"] == 0.0
    assert record["row_strategy"] == [0.5, 0.5]


def test_solve_game_requires_exactly_one_source(capsys, tmp_path):
    assert main(["solve-game"]) == 2
    path = tmp_path / "game.json"
    path.write_text("[[0.0]]")
    assert main(["solve-game", "--matrix", "[[0]]", "--file", str(path)]) == 2
    assert main(["solve-game", "--file", str(path)]) == 0
    capsys.readouterr()


def test_solve_game_rejects_ragged_matrix(capsys):
    assert main(["solve-game", "--matrix", "[[1,2],[3]]"]) == 2
    assert "error" in capsys.readouterr().err


def test_gen_instance_round_trips(tmp_path, capsys):
    out = tmp_path / "instance.json"
    argv = [
        "gen-instance", "--p", "2", "--a", "3", "--m", "2", "--k", "2",
        "--generator", "uniform-signed", "--seed", "11", "--output", str(out),
    ]
    assert main(argv) == 0
    instance = read_instance(out)
    assert instance.games.shape == (2, 3, 2, 2)
    assert instance.seed == 11
    capsys.readouterr()


def test_match_runs_deferred_acceptance(tmp_path, capsys):
    prefs_path = tmp_path / "prefs.json"
    write_preferences(PreferenceProfile(((0, 1), (0, 1)), ((0, 1), (0, 1))), prefs_path)
    out_path = tmp_path / "matched.json"
    assert main(["match", "--preferences", str(prefs_path), "--output", str(out_path)]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["pairs"] == [[0, 0], [1, 1]]
    assert json.loads(out_path.read_text())["pairs"] == [[0, 0], [1, 1]]


def test_audit_reports_instability(audit_files, capsys):
    instance_path, matching_path, strategies_path = audit_files
    argv = [
        "audit",
        "--instance", instance_path,
        "--matching", matching_path,
        "--strategies", strategies_path,
    ]
    assert main(argv) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["value"] == 1.0
    assert record["subsidies"]["R0"] == 0.5


def test_audit_missing_file_is_io_error(audit_files, capsys):
    _, matching_path, strategies_path = audit_files
    argv = [
        "audit",
        "--instance", "/nonexistent/instance.json",
        "--matching", matching_path,
        "--strategies", strategies_path,
    ]
    assert main(argv) == 3
    assert "error" in capsys.readouterr().err


def test_audit_malformed_file_is_input_error(audit_files, tmp_path, capsys):
    _, matching_path, strategies_path = audit_files
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    argv = [
        "audit",
        "--instance", str(bad),
        "--matching", matching_path,
        "--strategies", strategies_path,
    ]
    assert main(argv) == 2
    assert "line 1" in capsys.readouterr().err


def test_simulate_writes_traces(tmp_path, capsys):
    out = tmp_path / "results"
    argv = [
        "simulate", "--p", "1", "--a", "2", "--m", "2", "--k", "2",
        "--T", "20", "--runs", "2", "--workers", "1",
        "--delta", "auto", "--output-dir", str(out),
    ]
    assert main(argv) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["runs"] == 2 and summary["T"] == 20
    assert (out / "run_001.csv").exists()
    assert (out / "aggregate.csv").exists()


def test_simulate_merges_config_file(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "p": 2, "a": 2, "m": 2, "k": 2, "T": 10, "runs": 1,
        "workers": 1, "output_dir": str(tmp_path / "a"),
    }))
    assert main(["simulate", "--config", str(config_path)]) == 0
    # an explicit flag overrides the same key from the file
    assert main([
        "simulate", "--config", str(config_path),
        "--T", "5", "--output-dir", str(tmp_path / "b"),
    ]) == 0
    capsys.readouterr()
    rows = (tmp_path / "b" / "run_000.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 5


def test_simulate_rejects_unknown_config_keys(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"p": 1, "horizon": 9}))
    assert main(["simulate", "--config", str(config_path)]) == 2
    assert "horizon" in capsys.readouterr().err


def test_simulate_requires_market_dimensions(capsys):
    assert main(["simulate", "--p", "1", "--a", "1", "--m", "1"]) == 2
    assert "required" in capsys.readouterr().err.lower()


def test_simulate_rejects_bad_delta(tmp_path, capsys):
    argv = [
        "simulate", "--p", "1", "--a", "1", "--m", "1", "--k", "1",
        "--T", "5", "--runs", "1", "--delta", "sometimes",
        "--output-dir", str(tmp_path),
    ]
    assert main(argv) == 2
    assert "delta" in capsys.readouterr().err


def test_entry_raises_system_exit(capsys):
    with pytest.raises(SystemExit) as excinfo:
        entry()
    assert excinfo.value.code == 2
    capsys.readouterr()


def test_module_invocation():
    result = subprocess.run(
        [sys.executable, "-m", "matchgames", "bound", "--t", "2",
         "--p", "1", "--a", "1", "--m", "1", "--k", "1"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout)["t"] == 2
