import json
from pathlib import Path

import pytest

from peergrid.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from peergrid.harness import CSV_HEADER

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
BASELINE = str(SCENARIO_DIR / "baseline.json")


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_json_to_stdout(capsys):
    code, out, _ = run_cli(capsys, "run", "--config", BASELINE)
    assert code == EXIT_OK
    parsed = json.loads(out)
    assert parsed["seed"] == 42
    assert parsed["jobs"]


def test_run_csv_to_file(tmp_path, capsys):
    out_path = tmp_path / "report.csv"
    code, out, _ = run_cli(
        capsys, "run", "--config", BASELINE, "--format", "csv", "--out", str(out_path)
    )
    assert code == EXIT_OK
    assert out == ""
    lines = out_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER


def test_seed_override(capsys):
    code, out, _ = run_cli(capsys, "run", "--config", BASELINE, "--seed", "99")
    assert code == EXIT_OK
    assert json.loads(out)["seed"] == 99


def test_sweep_appends_seed_column(capsys):
    code, out, _ = run_cli(
        capsys, "run", "--config", BASELINE, "--sweep", "3", "--format", "json"
    )
    assert code == EXIT_OK
    sweep = json.loads(out)["sweep"]
    assert [s["seed"] for s in sweep] == [42, 43, 44]


def test_missed_deadline_is_still_exit_zero(tmp_path, capsys):
    config = {
        "peers": [{"peer_id": "slow", "processing_seconds_per_unit": 50.0,
                   "one_way_latency": 1.0}],
        "jobs": [{"job_id": "hopeless", "deadline": 5.0, "size": 2}],
        "allow_small_jobs": True,
    }
    path = tmp_path / "hopeless.json"
    path.write_text(json.dumps(config))
    code, out, _ = run_cli(capsys, "run", "--config", str(path))
    assert code == EXIT_OK
    assert json.loads(out)["jobs"][0]["met_deadline"] is False


def test_config_validation_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"peers": [], "jobs": []}))
    code, _, err = run_cli(capsys, "run", "--config", str(path))
    assert code == EXIT_CONFIG
    assert "peers" in err


def test_missing_file_exit_code(capsys):
    code, _, err = run_cli(capsys, "run", "--config", "/nonexistent/x.json")
    assert code == EXIT_IO
    assert "not found" in err


def test_bad_sweep_value(capsys):
    code, _, _ = run_cli(capsys, "run", "--config", BASELINE, "--sweep", "0")
    assert code == EXIT_CONFIG


def test_determinism_of_cli_output(capsys):
    _, first, _ = run_cli(capsys, "run", "--config", BASELINE)
    _, second, _ = run_cli(capsys, "run", "--config", BASELINE)
    assert first == second
