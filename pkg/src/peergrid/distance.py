"""Application-level turnaround-time ("distance") measurement.

The distributor keeps two lookup tables: a TaskID table recording when each
in-flight batch was dispatched and to whom, and a Turnaround-Time table
holding the running per-unit turnaround estimate for every peer it has heard
from. Measurement piggybacks entirely on normal task/result traffic, so it
adds no messages of its own; each processed result costs exactly three
indexed table accesses (lookup, removal, upsert).
"""

from dataclasses import dataclass
from typing import Optional


class ProtocolError(Exception):
    """A table operation that indicates a protocol bug (duplicate/orphan id)."""


@dataclass(frozen=True)
class DispatchEntry:
    """One in-flight batch: when it left, to whom, and how many units."""

    dispatch_time: float
    peer_id: str
    batch_size: int


class AccessCounter:
    """Counts indexed accesses made while processing results."""

    def __init__(self):
        self.count = 0

    def hit(self, n: int = 1) -> None:
        self.count += n


class TaskIdTable:
    """task_id -> (dispatch time, peer, batch size) for in-flight batches."""

    def __init__(self):
        self._entries: dict[str, DispatchEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, task_id: str) -> bool:
        return task_id in self._entries

    def get(self, task_id: str) -> Optional[DispatchEntry]:
        return self._entries.get(task_id)

    def insert(self, task_id: str, entry: DispatchEntry) -> None:
        self._entries[task_id] = entry

    def remove(self, task_id: str) -> DispatchEntry:
        return self._entries.pop(task_id)

    def task_ids(self) -> list[str]:
        return sorted(self._entries)


class TurnaroundTable:
    """peer_id -> smoothed per-unit turnaround estimate plus sample count.

    The first sample from a peer is stored verbatim; later samples update
    the estimate by an exponentially weighted moving average with weight
    ``alpha`` on the new sample. alpha = 1.0 recovers last-observation
    semantics.
    """

    def __init__(self, alpha: float = 0.5):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        self.alpha = alpha
        self._estimates: dict[str, float] = {}
        self._samples: dict[str, int] = {}

    def __contains__(self, peer_id: str) -> bool:
        return peer_id in self._estimates

    def estimate(self, peer_id: str) -> Optional[float]:
        return self._estimates.get(peer_id)

    def sample_count(self, peer_id: str) -> int:
        return self._samples.get(peer_id, 0)

    def upsert(self, peer_id: str, sample: float) -> float:
        if sample < 0:
            raise ValueError("turnaround sample must be >= 0")
        old = self._estimates.get(peer_id)
        if old is None:
            new = sample
        else:
            new = self.alpha * sample + (1.0 - self.alpha) * old
        self._estimates[peer_id] = new
        self._samples[peer_id] = self._samples.get(peer_id, 0) + 1
        return new

    def rows(self) -> list[tuple[str, float, int]]:
        """(peer_id, estimate_seconds, sample_count) rows, sorted by peer."""
        return [(p, self._estimates[p], self._samples[p]) for p in sorted(self._estimates)]


def record_dispatch(
    table: TaskIdTable, task_id: str, peer_id: str, batch_size: int, now: float
) -> DispatchEntry:
    """Insert a new in-flight batch; duplicate task ids are a protocol bug."""
    if batch_size < 1:
        raise ValueError("batch size must be >= 1")
    if task_id in table:
        raise ProtocolError(f"duplicate dispatch of task id {task_id!r}")
    entry = DispatchEntry(dispatch_time=now, peer_id=peer_id, batch_size=batch_size)
    table.insert(task_id, entry)
    return entry


def measure_turnaround(entry: DispatchEntry, completion_time: float) -> float:
    """Per-unit turnaround for a batch: (T_C - T_S) / n."""
    if completion_time < entry.dispatch_time:
        raise ValueError(
            f"completion at {completion_time} precedes dispatch at {entry.dispatch_time}"
        )
    return (completion_time - entry.dispatch_time) / entry.batch_size


def record_result_distance(
    task_ids: TaskIdTable,
    turnaround: TurnaroundTable,
    task_id: str,
    completion_time: float,
    accesses: Optional[AccessCounter] = None,
) -> tuple[DispatchEntry, float]:
    """Process one returned result through both tables.

    Exactly three indexed accesses: TaskID lookup, TaskID removal, and the
    Turnaround-Time upsert. Returns the resolved entry and the new estimate.
    """
    entry = task_ids.get(task_id)
    if accesses is not None:
        accesses.hit()
    if entry is None:
        raise ProtocolError(f"result for unknown task id {task_id!r}")
    task_ids.remove(task_id)
    if accesses is not None:
        accesses.hit()
    sample = measure_turnaround(entry, completion_time)
    new_estimate = turnaround.upsert(entry.peer_id, sample)
    if accesses is not None:
        accesses.hit()
    return entry, new_estimate


def discard_dispatch(table: TaskIdTable, task_id: str) -> DispatchEntry:
    """Drop an in-flight entry without recording a sample (timeout path)."""
    if task_id not in table:
        raise ProtocolError(f"cannot discard unknown task id {task_id!r}")
    return table.remove(task_id)


def lookup_distance(table: TurnaroundTable, peer_id: str) -> Optional[float]:
    """Current per-unit estimate for a peer, or None when never sampled."""
    return table.estimate(peer_id)


class PassiveDistanceTap:
    """Rebuilds both lookup tables purely from observed task/result messages.

    Used to demonstrate that turnaround measurement is a passive function of
    traffic the system already generates: attaching or detaching the tap
    cannot change the message trace, and its tables must agree with the
    distributor's own.
    """

    def __init__(self, alpha: float = 0.5):
        self.task_ids = TaskIdTable()
        self.turnaround = TurnaroundTable(alpha=alpha)

    def on_dispatch(self, task_id: str, peer_id: str, batch_size: int, time: float) -> None:
        record_dispatch(self.task_ids, task_id, peer_id, batch_size, time)

    def on_result(self, task_id: str, time: float) -> None:
        if task_id in self.task_ids:
            record_result_distance(self.task_ids, self.turnaround, task_id, time)

    def on_timeout(self, task_id: str) -> None:
        if task_id in self.task_ids:
            discard_dispatch(self.task_ids, task_id)
