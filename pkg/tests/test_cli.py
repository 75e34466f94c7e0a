from __future__ import annotations

import csv
import json

import pytest

from sigcross import parse_scenario
from sigcross.cli import main
from sigcross.scenario import bundled_path, load_scenario


def test_list(capsys):
    assert main(["list"]) == 0
    assert capsys.readouterr().out.split() == ["scenario1", "scenario2", "scenario3", "all_right"]


def test_emit_round_trips(capsys):
    assert main(["emit", "scenario2"]) == 0
    text = capsys.readouterr().out
    assert parse_scenario(text) == load_scenario(bundled_path("scenario2"))


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["run", "scenario3", "-o", str(out), "--policy", "fcfs"]) == 0
    assert "last_exit_time=" in capsys.readouterr().out
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"] == "scenario3"
    assert set(summary["exit_times"]) == {"1", "2", "3", "4"}
    assert not summary["collision"]
    with open(out / "series.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "z1", "z2", "z3", "z4", "v1", "v2", "v3", "v4"]
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0].startswith("t,id,")
    assert (out / "events.csv").exists()


def test_run_plots(tmp_path):
    pytest.importorskip("matplotlib")
    assert main(["run", "all_right", "-o", str(tmp_path), "--emit-plots"]) == 0
    assert (tmp_path / "series.png").stat().st_size > 0


def test_run_from_file(tmp_path):
    f = tmp_path / "one.yaml"
    f.write_text("vehicles:\n  - {in_lane: 5, out_lane: 8, initial_distance: 30, initial_speed: 6}\n")
    assert main(["run", str(f), "-o", str(tmp_path / "o")]) == 0


def test_compare(tmp_path, capsys):
    assert main(["compare", "scenario2", "-o", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "FCFS" in text and "ratio" in text
    doc = json.loads((tmp_path / "compare.json").read_text())
    assert doc["ratio"] == pytest.approx(doc["proposed"]["last_exit_time"] / doc["fcfs"]["last_exit_time"])
    assert (tmp_path / "fcfs" / "trace.csv").exists() and (tmp_path / "proposed" / "trace.csv").exists()


@pytest.mark.parametrize("argv", [
    ["run", "does-not-exist.yaml"],
    ["emit", "does-not-exist.yaml"],
])
def test_missing_file(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_scenario(tmp_path, capsys):
    f = tmp_path / "bad.yaml"
    f.write_text("vehicles:\n  - {in_lane: 1, out_lane: 4, initial_distance: 30, initial_speed: 5, color: red}\n")
    assert main(["run", str(f), "-o", str(tmp_path)]) == 2
    assert "bad.yaml:2" in capsys.readouterr().err


def test_timeout_exit_code(tmp_path):
    f = tmp_path / "slow.yaml"
    f.write_text("max_time: 1\nvehicles:\n  - {in_lane: 1, out_lane: 4, initial_distance: 60, initial_speed: 5}\n")
    assert main(["run", str(f), "-o", str(tmp_path)]) == 1


@pytest.mark.slow
def test_sweep(tmp_path, capsys):
    assert main(["sweep", "scenario1", "--policy", "fcfs", "-o", str(tmp_path)]) == 0
    assert "81 combinations, 0 with" in capsys.readouterr().out
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 81
    assert {r["maneuvers"] for r in rows} >= {"LLLL", "RRRR", "SSSS"}
