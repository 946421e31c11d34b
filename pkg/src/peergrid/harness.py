"""Scenario ingestion, experiment orchestration, and report emission.

A scenario is a single JSON document describing the peer population, the
jobs, and the protocol knobs. Running it is fully deterministic for a given
(config, seed) pair.
"""

import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

from .distance import PassiveDistanceTap
from .distributor import Distributor, EpochReport
from .selection import PeerGroup
from .simnet import AvailabilitySchedule, PeerProfile, peer_rng
from .task_model import JobSpec


class ConfigError(ValueError):
    """Scenario file failed validation; carries the offending field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field_name = field_name


_DEFAULTS = {
    "mu": 0.9,
    "ewma_alpha": 0.5,
    "probe_batches": 3,
    "timeout_multiplier": 3.0,
    "timeout_floor": 10.0,
    "max_retries": 5,
    "batch_size": 1,
    "epoch_seconds": 10.0,
    "seed": 0,
    "allow_small_jobs": False,
}


@dataclass(frozen=True)
class PeerParams:
    """Raw per-peer parameters; the schedule is materialized per run."""

    peer_id: str
    processing_seconds_per_unit: float
    one_way_latency: float
    availability: float = 1.0
    up_intervals: Optional[tuple] = None
    error_probability: float = 0.0
    abandon_probability: float = 0.0
    local_load_factor: float = 1.0


@dataclass(frozen=True)
class ScenarioConfig:
    peers: tuple
    jobs: tuple
    mu: float = _DEFAULTS["mu"]
    ewma_alpha: float = _DEFAULTS["ewma_alpha"]
    probe_batches: int = _DEFAULTS["probe_batches"]
    timeout_multiplier: float = _DEFAULTS["timeout_multiplier"]
    timeout_floor: float = _DEFAULTS["timeout_floor"]
    max_retries: int = _DEFAULTS["max_retries"]
    batch_size: int = _DEFAULTS["batch_size"]
    epoch_seconds: float = _DEFAULTS["epoch_seconds"]
    seed: int = _DEFAULTS["seed"]
    allow_small_jobs: bool = False

    def echo(self) -> dict:
        """Scalar knobs as a plain dict, for embedding in reports."""
        return {
            "mu": self.mu,
            "ewma_alpha": self.ewma_alpha,
            "probe_batches": self.probe_batches,
            "timeout_multiplier": self.timeout_multiplier,
            "timeout_floor": self.timeout_floor,
            "max_retries": self.max_retries,
            "batch_size": self.batch_size,
            "epoch_seconds": self.epoch_seconds,
            "peer_count": len(self.peers),
            "job_count": len(self.jobs),
        }


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ConfigError(field_name, message)


def _parse_peer(raw: dict, index: int) -> PeerParams:
    where = f"peers[{index}]"
    _require(isinstance(raw, dict), where, "must be an object")
    _require("peer_id" in raw, f"{where}.peer_id", "is required")
    pid = raw["peer_id"]
    _require(isinstance(pid, str) and pid, f"{where}.peer_id", "must be a non-empty string")

    def num(key, default=None, lo=None, hi=None, required=False):
        if key not in raw:
            _require(not required, f"{where}.{key}", "is required")
            return default
        value = raw[key]
        _require(isinstance(value, (int, float)) and not isinstance(value, bool),
                 f"{where}.{key}", "must be a number")
        if lo is not None:
            _require(value >= lo, f"{where}.{key}", f"must be >= {lo}")
        if hi is not None:
            _require(value <= hi, f"{where}.{key}", f"must be <= {hi}")
        return float(value)

    up_intervals = None
    if raw.get("up_intervals") is not None:
        ivs = raw["up_intervals"]
        _require(isinstance(ivs, list), f"{where}.up_intervals", "must be a list of [start, end]")
        prev = float("-inf")
        parsed = []
        for iv in ivs:
            _require(isinstance(iv, list) and len(iv) == 2, f"{where}.up_intervals",
                     "entries must be [start, end] pairs")
            s, e = float(iv[0]), float(iv[1])
            _require(s >= prev and e >= s, f"{where}.up_intervals",
                     "must be ordered and disjoint")
            parsed.append((s, e))
            prev = e
        up_intervals = tuple(parsed)

    return PeerParams(
        peer_id=pid,
        processing_seconds_per_unit=num("processing_seconds_per_unit", required=True, lo=0.0),
        one_way_latency=num("one_way_latency", required=True, lo=0.0),
        availability=num("availability", default=1.0, lo=0.0, hi=1.0),
        up_intervals=up_intervals,
        error_probability=num("error_probability", default=0.0, lo=0.0, hi=1.0),
        abandon_probability=num("abandon_probability", default=0.0, lo=0.0, hi=1.0),
        local_load_factor=num("local_load_factor", default=1.0, lo=1.0),
    )


def _parse_job(raw: dict, index: int) -> JobSpec:
    where = f"jobs[{index}]"
    _require(isinstance(raw, dict), where, "must be an object")
    for key in ("job_id", "deadline", "size"):
        _require(key in raw, f"{where}.{key}", "is required")
    try:
        return JobSpec(
            job_id=str(raw["job_id"]),
            arrival_time=float(raw.get("arrival_time", 0.0)),
            deadline=float(raw["deadline"]),
            size=int(raw["size"]),
        )
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from exc


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a raw scenario dict and fill defaults."""
    _require(isinstance(data, dict), "<root>", "scenario must be a JSON object")
    _require(isinstance(data.get("peers"), list) and data["peers"],
             "peers", "must be a non-empty list")
    _require(isinstance(data.get("jobs"), list) and data["jobs"],
             "jobs", "must be a non-empty list")

    peers = tuple(_parse_peer(p, i) for i, p in enumerate(data["peers"]))
    ids = [p.peer_id for p in peers]
    _require(len(set(ids)) == len(ids), "peers", "peer ids must be unique")
    jobs = tuple(_parse_job(j, i) for i, j in enumerate(data["jobs"]))
    job_ids = [j.job_id for j in jobs]
    _require(len(set(job_ids)) == len(job_ids), "jobs", "job ids must be unique")

    knobs = dict(_DEFAULTS)
    for key in knobs:
        if key in data:
            knobs[key] = data[key]

    _require(isinstance(knobs["mu"], (int, float)) and 0.0 < knobs["mu"] <= 1.0,
             "mu", "must lie in (0, 1]")
    _require(isinstance(knobs["ewma_alpha"], (int, float)) and 0.0 < knobs["ewma_alpha"] <= 1.0,
             "ewma_alpha", "must lie in (0, 1]")
    _require(isinstance(knobs["probe_batches"], int) and knobs["probe_batches"] >= 1,
             "probe_batches", "must be a positive integer")
    _require(knobs["timeout_multiplier"] >= 1.0, "timeout_multiplier", "must be >= 1")
    _require(knobs["timeout_floor"] > 0.0, "timeout_floor", "must be positive")
    _require(isinstance(knobs["max_retries"], int) and knobs["max_retries"] >= 0,
             "max_retries", "must be a non-negative integer")
    _require(isinstance(knobs["batch_size"], int) and knobs["batch_size"] >= 1,
             "batch_size", "must be a positive integer")
    _require(knobs["epoch_seconds"] > 0.0, "epoch_seconds", "must be positive")
    _require(isinstance(knobs["seed"], int), "seed", "must be an integer")

    config = ScenarioConfig(
        peers=peers,
        jobs=jobs,
        mu=float(knobs["mu"]),
        ewma_alpha=float(knobs["ewma_alpha"]),
        probe_batches=knobs["probe_batches"],
        timeout_multiplier=float(knobs["timeout_multiplier"]),
        timeout_floor=float(knobs["timeout_floor"]),
        max_retries=knobs["max_retries"],
        batch_size=knobs["batch_size"],
        epoch_seconds=float(knobs["epoch_seconds"]),
        seed=knobs["seed"],
        allow_small_jobs=bool(knobs["allow_small_jobs"]),
    )

    small = [j.job_id for j in jobs if j.size <= len(peers)]
    if small and not config.allow_small_jobs:
        warnings.warn(
            f"jobs {small} have unit counts not exceeding the peer count; "
            "task units are expected to outnumber task processors "
            "(set allow_small_jobs to silence)",
            stacklevel=2,
        )
    return config


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON: {exc}") from exc
    return parse_config(data)


def build_profiles(config: ScenarioConfig, seed: int) -> dict[str, PeerProfile]:
    """Materialize peer profiles, drawing availability schedules from the
    per-peer schedule substream."""
    horizon = max(j.deadline for j in config.jobs) + config.timeout_floor * (
        config.max_retries + 1
    )
    profiles = {}
    for params in config.peers:
        if params.up_intervals is not None:
            schedule = AvailabilitySchedule(params.up_intervals)
        elif params.availability >= 1.0:
            schedule = AvailabilitySchedule.always_up()
        else:
            schedule = AvailabilitySchedule.bernoulli(
                params.availability,
                horizon,
                config.epoch_seconds,
                peer_rng(seed, params.peer_id + "/schedule"),
            )
        profiles[params.peer_id] = PeerProfile(
            peer_id=params.peer_id,
            processing_seconds_per_unit=params.processing_seconds_per_unit,
            one_way_latency=params.one_way_latency,
            schedule=schedule,
            error_probability=params.error_probability,
            abandon_probability=params.abandon_probability,
            local_load_factor=params.local_load_factor,
        )
    return profiles


@dataclass(frozen=True)
class RunSummary:
    """Deterministic outcome of one scenario run."""

    seed: int
    mu: float
    peers: tuple  # PeerReportRow, aggregated across epochs
    jobs: tuple  # (job_id, outcome, finish_time, met_deadline)
    groups: dict
    message_count: int
    distance_table: tuple  # (peer_id, estimate_seconds, sample_count)
    config_echo: dict

    def to_dict(self, precision: int = 6) -> dict:
        def r(x):
            return None if x is None else round(x, precision)

        return {
            "seed": self.seed,
            "mu": r(self.mu),
            "message_count": self.message_count,
            "config": {
                k: (r(v) if isinstance(v, float) else v)
                for k, v in sorted(self.config_echo.items())
            },
            "peers": [
                {
                    "peer_id": row.peer_id,
                    "credibility": r(row.credibility),
                    "computation_time": r(row.computation_time),
                    "distance": r(row.distance),
                    "coarse": row.coarse,
                    "group": row.group,
                    "selected": row.selected,
                    "units_completed": row.units_completed,
                    "correct": row.correct,
                    "erroneous": row.erroneous,
                    "incomplete": row.incomplete,
                }
                for row in self.peers
            ],
            "jobs": [
                {
                    "job_id": job_id,
                    "outcome": outcome,
                    "finish_time": r(finish),
                    "met_deadline": met,
                }
                for job_id, outcome, finish, met in self.jobs
            ],
            "groups": {
                name: {
                    "peer_count": agg["peer_count"],
                    "mean_credibility": r(agg["mean_credibility"]),
                    "mean_distance": r(agg["mean_distance"]),
                    "units_completed_share": r(agg["units_completed_share"]),
                }
                for name, agg in sorted(self.groups.items())
            },
            "distance_table": [
                {"peer_id": pid, "estimate_seconds": r(est), "sample_count": count}
                for pid, est, count in self.distance_table
            ],
        }


@dataclass
class ExperimentResult:
    """A run summary plus the raw instrumentation tests need."""

    summary: RunSummary
    trace: list
    epoch_reports: list
    results_processed: int
    table_accesses: int
    orphan_results: int
    tap: Optional[PassiveDistanceTap]
    distributor: Distributor


def _merge_peer_rows(reports: list[EpochReport]) -> tuple:
    from .distributor import PeerReportRow

    latest: dict[str, Any] = {}
    units: dict[str, int] = {}
    tallies: dict[str, list[int]] = {}
    for report in reports:
        for row in report.peer_rows:
            latest[row.peer_id] = row
            units[row.peer_id] = units.get(row.peer_id, 0) + row.units_completed
            t = tallies.setdefault(row.peer_id, [0, 0, 0])
            t[0] += row.correct
            t[1] += row.erroneous
            t[2] += row.incomplete
    merged = []
    for pid in sorted(latest):
        row = latest[pid]
        c, e, i = tallies[pid]
        merged.append(
            PeerReportRow(
                peer_id=pid,
                credibility=row.credibility,
                computation_time=row.computation_time,
                distance=row.distance,
                coarse=row.coarse,
                group=row.group,
                selected=row.selected,
                units_completed=units[pid],
                correct=c,
                erroneous=e,
                incomplete=i,
            )
        )
    return tuple(merged)


def _group_aggregates(peer_rows: tuple) -> dict:
    total_units = sum(row.units_completed for row in peer_rows)
    groups = {}
    for group in PeerGroup:
        members = [row for row in peer_rows if row.group == group.value]
        creds = [row.credibility for row in members if row.credibility is not None]
        dists = [row.distance for row in members if row.distance is not None]
        done = sum(row.units_completed for row in members)
        groups[group.value] = {
            "peer_count": len(members),
            "mean_credibility": sum(creds) / len(creds) if creds else None,
            "mean_distance": sum(dists) / len(dists) if dists else None,
            "units_completed_share": done / total_units if total_units else 0.0,
        }
    return groups


def run_experiment(
    config: ScenarioConfig,
    seed: Optional[int] = None,
    select_all: bool = False,
    attach_tap: bool = True,
) -> ExperimentResult:
    """Run every job of a scenario through one distributor instance.

    ``select_all`` is the control mode that skips efficient-peer selection
    and dispatches to every responder; ``attach_tap`` toggles the passive
    trace-side distance measurement replica.
    """
    run_seed = config.seed if seed is None else seed
    profiles = build_profiles(config, run_seed)
    tap = PassiveDistanceTap(alpha=config.ewma_alpha) if attach_tap else None
    distributor = Distributor(
        profiles,
        seed=run_seed,
        mu=config.mu,
        ewma_alpha=config.ewma_alpha,
        probe_batches=config.probe_batches,
        timeout_multiplier=config.timeout_multiplier,
        timeout_floor=config.timeout_floor,
        max_retries=config.max_retries,
        batch_size=config.batch_size,
        select_all=select_all,
        distance_tap=tap,
    )
    reports = [distributor.run_job(job) for job in sorted(config.jobs, key=lambda j: j.arrival_time)]

    peer_rows = _merge_peer_rows(reports)
    jobs = tuple(
        (r.job_id, r.outcome, r.finish_time, r.met_deadline) for r in reports
    )
    summary = RunSummary(
        seed=run_seed,
        mu=config.mu,
        peers=peer_rows,
        jobs=jobs,
        groups=_group_aggregates(peer_rows),
        message_count=distributor.message_count,
        distance_table=tuple(distributor.turnaround.rows()),
        config_echo=config.echo(),
    )
    return ExperimentResult(
        summary=summary,
        trace=list(distributor.trace),
        epoch_reports=reports,
        results_processed=distributor.results_processed,
        table_accesses=distributor.accesses.count,
        orphan_results=distributor.orphan_results,
        tap=tap,
        distributor=distributor,
    )


def run_scenario(
    config: ScenarioConfig, seed: Optional[int] = None, select_all: bool = False
) -> RunSummary:
    """Deterministic summary for (config, seed)."""
    return run_experiment(config, seed=seed, select_all=select_all).summary


CSV_HEADER = (
    "section,id,credibility,computation_time,distance,coarse,group,selected,"
    "units_completed,correct,erroneous,incomplete,outcome,finish_time,"
    "met_deadline,message_count,seed"
)


def _fmt(value, precision: int = 6) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{precision}f}"
    return str(value)


def emit_report(summary: RunSummary, fmt: str) -> bytes:
    """Render a run summary as csv or json bytes with stable field order."""
    if fmt == "json":
        text = json.dumps(summary.to_dict(), sort_keys=True, indent=2) + "\n"
        return text.encode("utf-8")
    if fmt == "csv":
        return _emit_csv([summary])
    raise ValueError(f"unknown report format {fmt!r}")


def _emit_csv(summaries: list[RunSummary]) -> bytes:
    lines = [CSV_HEADER]
    for summary in summaries:
        seed = summary.seed
        for row in summary.peers:
            lines.append(
                ",".join(
                    [
                        "peer",
                        row.peer_id,
                        _fmt(row.credibility),
                        _fmt(row.computation_time),
                        _fmt(row.distance),
                        _fmt(row.coarse),
                        _fmt(row.group),
                        _fmt(row.selected),
                        _fmt(row.units_completed),
                        _fmt(row.correct),
                        _fmt(row.erroneous),
                        _fmt(row.incomplete),
                        "",
                        "",
                        "",
                        "",
                        _fmt(seed),
                    ]
                )
            )
        for job_id, outcome, finish, met in summary.jobs:
            lines.append(
                ",".join(
                    [
                        "job",
                        job_id,
                        *[""] * 10,
                        outcome,
                        _fmt(finish),
                        _fmt(met),
                        "",
                        _fmt(seed),
                    ]
                )
            )
        if summary.peers or summary.jobs:
            lines.append(
                ",".join(
                    [
                        "aggregate",
                        "run",
                        *[""] * 13,
                        _fmt(summary.message_count),
                        _fmt(seed),
                    ]
                )
            )
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_sweep_report(summaries: list[RunSummary], fmt: str) -> bytes:
    """Render a multi-seed sweep; each row/summary carries its seed."""
    if fmt == "json":
        text = json.dumps(
            {"sweep": [s.to_dict() for s in summaries]}, sort_keys=True, indent=2
        ) + "\n"
        return text.encode("utf-8")
    if fmt == "csv":
        return _emit_csv(summaries)
    raise ValueError(f"unknown report format {fmt!r}")
