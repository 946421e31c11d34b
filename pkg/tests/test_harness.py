import json
from pathlib import Path

import pytest

from peergrid.harness import (
    CSV_HEADER,
    ConfigError,
    RunSummary,
    emit_report,
    emit_sweep_report,
    load_config,
    parse_config,
    run_experiment,
    run_scenario,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def minimal_config(**overrides):
    data = {
        "peers": [
            {"peer_id": "p1", "processing_seconds_per_unit": 1.0, "one_way_latency": 0.1}
        ],
        "jobs": [{"job_id": "j1", "deadline": 60.0, "size": 10}],
        "allow_small_jobs": True,
    }
    data.update(overrides)
    return data


class TestLoadConfig:
    def test_minimal_config_gets_defaults(self):
        config = parse_config(minimal_config())
        assert config.mu == 0.9
        assert config.ewma_alpha == 0.5
        assert config.probe_batches == 3
        assert config.timeout_multiplier == 3.0
        assert config.max_retries == 5
        assert config.seed == 0

    def test_mu_out_of_range_names_field(self):
        with pytest.raises(ConfigError) as err:
            parse_config(minimal_config(mu=1.5))
        assert err.value.field_name == "mu"

    def test_small_job_warns_about_unit_count(self):
        data = minimal_config()
        del data["allow_small_jobs"]
        data["jobs"] = [{"job_id": "j1", "deadline": 60.0, "size": 1}]
        with pytest.warns(UserWarning, match="outnumber"):
            parse_config(data)

    def test_small_job_warning_suppressed_by_flag(self, recwarn):
        parse_config(minimal_config())
        assert not [w for w in recwarn if issubclass(w.category, UserWarning)]

    def test_missing_peer_field_named(self):
        data = minimal_config()
        del data["peers"][0]["one_way_latency"]
        with pytest.raises(ConfigError, match="one_way_latency"):
            parse_config(data)

    def test_duplicate_peer_ids_rejected(self):
        data = minimal_config()
        data["peers"].append(dict(data["peers"][0]))
        with pytest.raises(ConfigError, match="unique"):
            parse_config(data)

    def test_invalid_json_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(bad))

    def test_scenario_corpus_loads(self):
        paths = sorted(SCENARIO_DIR.glob("*.json"))
        assert paths
        for path in paths:
            config = load_config(str(path))
            # Shipped scenarios keep task units more numerous than peers.
            assert all(job.size > len(config.peers) for job in config.jobs)


class TestRunScenario:
    def test_same_seed_identical_summaries(self):
        config = parse_config(minimal_config())
        assert run_scenario(config, seed=5) == run_scenario(config, seed=5)

    def test_seed_sweep_runs_are_independent(self):
        config = load_config(str(SCENARIO_DIR / "baseline.json"))
        summaries = [run_scenario(config, seed=42 + k) for k in range(5)]
        assert len(summaries) == 5
        assert all(s.seed == 42 + k for k, s in enumerate(summaries))

    def test_group_counts_sum_to_responders(self):
        config = load_config(str(SCENARIO_DIR / "baseline.json"))
        summary = run_scenario(config)
        classified = [r for r in summary.peers if r.group is not None]
        assert sum(g["peer_count"] for g in summary.groups.values()) == len(classified)

    def test_per_group_units_sum_to_total(self):
        config = load_config(str(SCENARIO_DIR / "baseline.json"))
        summary = run_scenario(config)
        shares = [g["units_completed_share"] for g in summary.groups.values()]
        assert sum(shares) == pytest.approx(1.0)


class TestEmitReport:
    def config(self):
        return load_config(str(SCENARIO_DIR / "baseline.json"))

    def test_csv_header_is_pinned(self):
        assert CSV_HEADER == (
            "section,id,credibility,computation_time,distance,coarse,group,"
            "selected,units_completed,correct,erroneous,incomplete,outcome,"
            "finish_time,met_deadline,message_count,seed"
        )

    def test_csv_row_count_schema(self):
        summary = run_scenario(self.config())
        lines = emit_report(summary, "csv").decode("utf-8").splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + len(summary.peers) + len(summary.jobs) + 1

    def test_csv_uses_lf_and_utf8(self):
        payload = emit_report(run_scenario(self.config()), "csv")
        assert b"\r" not in payload
        payload.decode("utf-8")

    def test_empty_summary_is_header_only(self):
        empty = RunSummary(
            seed=0, mu=0.9, peers=(), jobs=(), groups={},
            message_count=0, distance_table=(), config_echo={},
        )
        assert emit_report(empty, "csv").decode("utf-8") == CSV_HEADER + "\n"

    def test_json_round_trips_to_equal_values(self):
        summary = run_scenario(self.config())
        parsed = json.loads(emit_report(summary, "json"))
        assert parsed == summary.to_dict()

    def test_json_key_set_is_pinned(self):
        summary = run_scenario(self.config())
        parsed = json.loads(emit_report(summary, "json"))
        assert set(parsed) == {
            "seed", "mu", "message_count", "config", "peers", "jobs",
            "groups", "distance_table",
        }
        assert set(parsed["peers"][0]) == {
            "peer_id", "credibility", "computation_time", "distance", "coarse",
            "group", "selected", "units_completed", "correct", "erroneous",
            "incomplete",
        }
        assert set(parsed["jobs"][0]) == {"job_id", "outcome", "finish_time", "met_deadline"}

    def test_floats_rendered_with_six_decimals(self):
        text = emit_report(run_scenario(self.config()), "csv").decode("utf-8")
        row = next(line for line in text.splitlines() if line.startswith("peer,alpha"))
        credibility_field = row.split(",")[2]
        assert len(credibility_field.split(".")[1]) == 6

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            emit_report(run_scenario(self.config()), "xml")

    def test_sweep_report_carries_seed_per_row(self):
        config = self.config()
        summaries = [run_scenario(config, seed=s) for s in (1, 2)]
        lines = emit_sweep_report(summaries, "csv").decode("utf-8").splitlines()
        seeds = {line.rsplit(",", 1)[1] for line in lines[1:]}
        assert seeds == {"1", "2"}


class TestControlMode:
    def test_select_all_dispatches_beyond_pg1(self):
        config = load_config(str(SCENARIO_DIR / "separation.json"))
        control = run_scenario(config, select_all=True)
        served = {r.peer_id for r in control.peers if r.units_completed > 0}
        assert any(pid.startswith("bad") for pid in served)


class TestExperimentInstrumentation:
    def test_trace_and_counters_exposed(self):
        config = parse_config(minimal_config())
        result = run_experiment(config)
        assert result.summary.message_count == len(result.trace)
        assert result.table_accesses == 3 * result.results_processed
