"""The task-distributor state machine.

One epoch per job: announce task availability, probe responders with
known-answer units, classify them into peer groups, then dispatch the job's
units to the efficient group, handling timeouts, erroneous results, and
re-dispatch until the job completes or its deadline passes.

Every message is recorded in a trace at delivery time as
(time, src, dst, kind, payload); turnaround measurement is pure local
bookkeeping over that traffic and never adds messages.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import distance as dist
from .metrics import (
    CredibilityCounters,
    PeerSnapshot,
    computation_time,
    credibility,
    estimate_availability,
    record_result,
)
from .selection import (
    CoarseClass,
    PeerGroup,
    classify_population,
    select_efficient,
)
from .simnet import EventKind, PeerProfile, SimClock, peer_rng, simulate_batch
from .task_model import JobSpec, ResultKind, is_successful, split_job

DISTRIBUTOR_ID = "TD"

# Message kinds on the wire.
MSG_AVAILABILITY = "task_availability"
MSG_REQUEST = "task_request"
MSG_DISPATCH = "task_dispatch"
MSG_RESULT = "task_result"

# Epoch outcomes.
COMPLETED = "completed"
DEADLINE_MISSED = "deadline_missed"
NO_PEERS = "no_peers"
NO_EFFICIENT_PEERS = "no_efficient_peers"
RETRIES_EXHAUSTED = "retries_exhausted"


@dataclass(frozen=True)
class PeerReportRow:
    peer_id: str
    credibility: Optional[float]
    computation_time: Optional[float]
    distance: Optional[float]
    coarse: Optional[str]
    group: Optional[str]
    selected: bool
    units_completed: int
    correct: int
    erroneous: int
    incomplete: int


@dataclass(frozen=True)
class EpochReport:
    """Immutable record of one announce-probe-classify-dispatch cycle."""

    job_id: str
    outcome: str
    finish_time: Optional[float]
    met_deadline: bool
    peer_rows: tuple
    responders: tuple
    dropped: tuple  # responders that never produced a measurable probe

    @property
    def units_completed(self) -> int:
        return sum(row.units_completed for row in self.peer_rows)


@dataclass
class _EpochTallies:
    correct: int = 0
    erroneous: int = 0
    incomplete: int = 0
    units_completed: int = 0


class Distributor:
    """Single-job-at-a-time task distributor over a set of peer profiles.

    Credibility counters and the turnaround table persist across epochs;
    each job still gets a fresh announce-probe-classify pass.
    """

    def __init__(
        self,
        peers: dict[str, PeerProfile],
        seed: int,
        mu: float = 0.9,
        ewma_alpha: float = 0.5,
        probe_batches: int = 3,
        timeout_multiplier: float = 3.0,
        timeout_floor: float = 10.0,
        max_retries: int = 5,
        batch_size: int = 1,
        select_all: bool = False,
        distance_tap: Optional[dist.PassiveDistanceTap] = None,
    ):
        self.peers = dict(peers)
        self.mu = mu
        self.probe_batches = probe_batches
        self.timeout_multiplier = timeout_multiplier
        self.timeout_floor = timeout_floor
        self.max_retries = max_retries
        self.batch_size = batch_size
        self.select_all = select_all

        self.counters = {pid: CredibilityCounters() for pid in peers}
        self.task_ids = dist.TaskIdTable()
        self.turnaround = dist.TurnaroundTable(alpha=ewma_alpha)
        self.accesses = dist.AccessCounter()
        self.tap = distance_tap
        self.rngs = {pid: peer_rng(seed, pid) for pid in peers}

        self.trace: list[tuple] = []
        self.results_processed = 0
        self.orphan_results = 0
        self.dispatched_batches = 0
        self.resolved_batches = 0
        self.clock_now = 0.0

    @property
    def message_count(self) -> int:
        return len(self.trace)

    def _record(self, time: float, src: str, dst: str, kind: str, payload: tuple) -> None:
        self.trace.append((time, src, dst, kind, payload))

    def _timeout_after(self, peer_id: str, batch_size: int) -> float:
        est = dist.lookup_distance(self.turnaround, peer_id)
        base = est * batch_size if est is not None else 0.0
        return max(self.timeout_multiplier * base, self.timeout_floor)

    def _dispatch_batch(self, clock: SimClock, t_id: str, peer_id: str, n: int) -> None:
        profile = self.peers[peer_id]
        now = clock.now
        timeout_after = self._timeout_after(peer_id, n)
        dist.record_dispatch(self.task_ids, t_id, peer_id, n, now)
        if self.tap is not None:
            self.tap.on_dispatch(t_id, peer_id, n, now)
        self.dispatched_batches += 1
        arrive = now + profile.one_way_latency
        clock.schedule_at(arrive, EventKind.MESSAGE_DELIVERY, ("dispatch", t_id, peer_id, n))
        kind, reply_time = simulate_batch(profile, n, now, self.rngs[peer_id])
        if reply_time is not None:
            clock.schedule_at(
                reply_time, EventKind.MESSAGE_DELIVERY, ("result", t_id, peer_id, kind)
            )
        clock.schedule_at(now + timeout_after, EventKind.TIMEOUT, t_id)

    def _process_result(self, t_id: str, peer_id: str, kind: ResultKind, now: float,
                        tallies: dict) -> dist.DispatchEntry:
        entry, _ = dist.record_result_distance(
            self.task_ids, self.turnaround, t_id, now, self.accesses
        )
        if self.tap is not None:
            self.tap.on_result(t_id, now)
        self.results_processed += 1
        self.resolved_batches += 1
        self.counters[peer_id] = record_result(self.counters[peer_id], kind)
        if kind is ResultKind.CORRECT:
            tallies[peer_id].correct += 1
        else:
            tallies[peer_id].erroneous += 1
        return entry

    def _process_timeout(self, t_id: str, tallies: dict) -> dist.DispatchEntry:
        entry = dist.discard_dispatch(self.task_ids, t_id)
        if self.tap is not None:
            self.tap.on_timeout(t_id)
        self.resolved_batches += 1
        self.counters[entry.peer_id] = record_result(
            self.counters[entry.peer_id], ResultKind.INCOMPLETE
        )
        tallies[entry.peer_id].incomplete += 1
        return entry

    def _build_snapshots(
        self, responders: list[str], probe_start: float, probe_end: float
    ) -> tuple[list[PeerSnapshot], list[str]]:
        snapshots, dropped = [], []
        for pid in responders:
            d = dist.lookup_distance(self.turnaround, pid)
            if d is None:
                dropped.append(pid)
                continue
            if probe_end > probe_start:
                obs = estimate_availability(
                    self.peers[pid].schedule.up_intervals(probe_start, probe_end),
                    (probe_start, probe_end),
                )
                pct = computation_time(obs)
            else:
                pct = 0.0  # instantaneous probe window: no basis to differ
            snapshots.append(
                PeerSnapshot(pid, credibility(self.counters[pid]), pct, d)
            )
        return snapshots, dropped

    def run_job(self, job: JobSpec) -> EpochReport:
        """Run one full epoch for ``job`` and return its report."""
        clock = SimClock(start=max(self.clock_now, job.arrival_time))
        tallies = {pid: _EpochTallies() for pid in self.peers}

        phase = "announcing"
        awaiting_announce = 0
        responders: list[str] = []
        outstanding_probes: set[str] = set()
        probe_start = probe_end = clock.now
        snapshots: list[PeerSnapshot] = []
        dropped: list[str] = []
        groups: dict[str, tuple[CoarseClass, PeerGroup]] = {}
        selected: set[str] = set()

        pending: deque = deque()
        in_flight: dict[str, tuple[tuple, str]] = {}
        completed: set[str] = set()
        retries: dict[str, int] = {}
        last_peer: dict[str, Optional[str]] = {}
        idle: set[str] = set()
        task_seq = 0
        total_units = job.size

        outcome: Optional[str] = None
        finish_time: Optional[float] = None

        def begin_probe() -> None:
            nonlocal phase, probe_start
            phase = "probing"
            probe_start = clock.now
            for pid in responders:
                for b in range(self.probe_batches):
                    t_id = f"probe:{job.job_id}:{pid}:{b}"
                    outstanding_probes.add(t_id)
                    self._dispatch_batch(clock, t_id, pid, 1)

        def begin_dispatch() -> Optional[str]:
            nonlocal phase, probe_end, snapshots, dropped, groups, selected, pending
            probe_end = clock.now
            snapshots, dropped = self._build_snapshots(responders, probe_start, probe_end)
            groups = classify_population(snapshots, self.mu)
            if self.select_all:
                selected.update(s.peer_id for s in snapshots)
            else:
                selected.update(select_efficient(snapshots, self.mu))
            if not selected:
                return NO_EFFICIENT_PEERS
            phase = "dispatching"
            idle.update(selected)
            units = split_job(job)
            pending.extend(units)
            for unit in units:
                retries[unit.unit_id] = 0
                last_peer[unit.unit_id] = None
            fill()
            return None

        def pick_peer(avoid: Optional[str]) -> str:
            ranked = sorted(
                idle, key=lambda p: (dist.lookup_distance(self.turnaround, p), p)
            )
            for pid in ranked:
                if pid != avoid:
                    return pid
            return ranked[0]

        def fill() -> None:
            nonlocal task_seq
            while pending and idle:
                batch = tuple(
                    pending.popleft()
                    for _ in range(min(self.batch_size, len(pending)))
                )
                pid = pick_peer(last_peer[batch[0].unit_id])
                idle.discard(pid)
                t_id = f"task:{job.job_id}:{task_seq}"
                task_seq += 1
                in_flight[t_id] = (batch, pid)
                self._dispatch_batch(clock, t_id, pid, len(batch))

        def requeue(batch: tuple, pid: str) -> Optional[str]:
            for unit in batch:
                retries[unit.unit_id] += 1
                if retries[unit.unit_id] > self.max_retries:
                    return RETRIES_EXHAUSTED
                last_peer[unit.unit_id] = pid
                pending.append(unit)
            return None

        def check_conservation() -> None:
            in_flight_units = sum(len(b) for b, _ in in_flight.values())
            assert len(pending) + in_flight_units + len(completed) == total_units

        # Announce: one availability message per peer; peers that are up when
        # it arrives reply with a task request.
        announce_time = clock.now
        for pid in sorted(self.peers):
            lat = self.peers[pid].one_way_latency
            clock.schedule_at(
                announce_time + lat, EventKind.MESSAGE_DELIVERY, ("availability", pid)
            )
            awaiting_announce += 1

        while outcome is None:
            event = clock.step()
            if event is None:
                break
            if event.fire_time > job.deadline:
                outcome = DEADLINE_MISSED
                break

            if event.kind is EventKind.MESSAGE_DELIVERY:
                tag = event.payload[0]
                if tag == "availability":
                    pid = event.payload[1]
                    self._record(clock.now, DISTRIBUTOR_ID, pid, MSG_AVAILABILITY, (job.job_id,))
                    awaiting_announce -= 1
                    if self.peers[pid].schedule.is_up(clock.now):
                        clock.schedule_at(
                            clock.now + self.peers[pid].one_way_latency,
                            EventKind.MESSAGE_DELIVERY,
                            ("request", pid),
                        )
                        awaiting_announce += 1
                elif tag == "request":
                    pid = event.payload[1]
                    self._record(clock.now, pid, DISTRIBUTOR_ID, MSG_REQUEST, (job.job_id,))
                    responders.append(pid)
                    awaiting_announce -= 1
                elif tag == "dispatch":
                    _, t_id, pid, n = event.payload
                    self._record(clock.now, DISTRIBUTOR_ID, pid, MSG_DISPATCH, (t_id, n))
                elif tag == "result":
                    _, t_id, pid, kind = event.payload
                    self._record(clock.now, pid, DISTRIBUTOR_ID, MSG_RESULT, (t_id, kind.value))
                    if t_id not in self.task_ids:
                        self.orphan_results += 1  # reply landed after its timeout
                    else:
                        self._process_result(t_id, pid, kind, clock.now, tallies)
                        if phase == "probing":
                            outstanding_probes.discard(t_id)
                        elif phase == "dispatching":
                            batch, bpid = in_flight.pop(t_id)
                            idle.add(bpid)
                            if kind is ResultKind.CORRECT:
                                for unit in batch:
                                    completed.add(unit.unit_id)
                                tallies[bpid].units_completed += len(batch)
                                if len(completed) == total_units:
                                    finish_time = clock.now
                                    outcome = COMPLETED
                            else:
                                outcome = requeue(batch, bpid)
                            if outcome is None:
                                fill()
                                check_conservation()

                if phase == "announcing" and awaiting_announce == 0:
                    if not responders:
                        outcome = NO_PEERS
                    else:
                        begin_probe()

            elif event.kind is EventKind.TIMEOUT:
                t_id = event.payload
                if t_id in self.task_ids:
                    self._process_timeout(t_id, tallies)
                    if phase == "probing":
                        outstanding_probes.discard(t_id)
                    elif phase == "dispatching":
                        batch, bpid = in_flight.pop(t_id)
                        idle.add(bpid)
                        outcome = requeue(batch, bpid)
                        if outcome is None:
                            fill()
                            check_conservation()

            if outcome is None and phase == "probing" and not outstanding_probes:
                outcome = begin_dispatch()
                if phase == "dispatching" and not pending and not in_flight and outcome is None:
                    # Degenerate: nothing dispatched (cannot happen for size >= 1).
                    outcome = COMPLETED
                    finish_time = clock.now

        if outcome is None:
            outcome = DEADLINE_MISSED

        # Drop stale in-flight entries so tables never leak across epochs.
        for t_id in self.task_ids.task_ids():
            dist.discard_dispatch(self.task_ids, t_id)
            if self.tap is not None:
                self.tap.on_timeout(t_id)
            self.resolved_batches += 1

        self.clock_now = clock.now

        snap_by_id = {s.peer_id: s for s in snapshots}
        rows = []
        for pid in sorted(responders):
            snap = snap_by_id.get(pid)
            coarse_group = groups.get(pid)
            rows.append(
                PeerReportRow(
                    peer_id=pid,
                    credibility=snap.credibility if snap else None,
                    computation_time=snap.computation_time if snap else None,
                    distance=snap.distance if snap else None,
                    coarse=coarse_group[0].value if coarse_group else None,
                    group=coarse_group[1].value if coarse_group else None,
                    selected=pid in selected,
                    units_completed=tallies[pid].units_completed,
                    correct=tallies[pid].correct,
                    erroneous=tallies[pid].erroneous,
                    incomplete=tallies[pid].incomplete,
                )
            )

        met = finish_time is not None and is_successful(job, finish_time)
        return EpochReport(
            job_id=job.job_id,
            outcome=outcome,
            finish_time=finish_time,
            met_deadline=met,
            peer_rows=tuple(rows),
            responders=tuple(sorted(responders)),
            dropped=tuple(sorted(dropped)),
        )
