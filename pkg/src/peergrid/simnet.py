"""Deterministic discrete-event simulation of task processor peers.

Time is continuous (real-valued seconds); events are totally ordered by
(fire time, insertion sequence) so equal-time events fire FIFO. Each peer
draws from its own random substream derived by hashing (seed, peer_id),
so adding a peer never perturbs another peer's draws.
"""

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence

from .task_model import ResultKind


class EventKind(Enum):
    MESSAGE_DELIVERY = "message_delivery"
    PROCESSING_DONE = "processing_done"
    TIMEOUT = "timeout"
    JOB_ARRIVAL = "job_arrival"
    EPOCH_TICK = "epoch_tick"


@dataclass(frozen=True)
class Event:
    fire_time: float
    kind: EventKind
    payload: Any = None


class SimClock:
    """Monotone simulated clock with a priority event queue."""

    def __init__(self, start: float = 0.0):
        self.now = start
        self._queue: list[tuple[float, int, Event]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._queue)

    def schedule(self, event: Event) -> None:
        if event.fire_time < self.now:
            raise ValueError(
                f"cannot schedule event at {event.fire_time} before now ({self.now})"
            )
        heapq.heappush(self._queue, (event.fire_time, self._seq, event))
        self._seq += 1

    def schedule_at(self, fire_time: float, kind: EventKind, payload: Any = None) -> None:
        self.schedule(Event(fire_time=fire_time, kind=kind, payload=payload))

    def step(self) -> Optional[Event]:
        """Pop and return the earliest event, or None when exhausted."""
        if not self._queue:
            return None
        fire_time, _, event = heapq.heappop(self._queue)
        self.now = fire_time
        return event


def peer_rng(seed: int, peer_id: str) -> random.Random:
    """Independent substream for one peer, stable across runs and platforms."""
    digest = hashlib.blake2b(
        f"{seed}:{peer_id}".encode("utf-8"), digest_size=8
    ).digest()
    return random.Random(int.from_bytes(digest, "big"))


class AvailabilitySchedule:
    """Up/down intervals of one peer over the simulation horizon.

    Built either from explicit (start, end) up-intervals or by drawing
    per-epoch Bernoulli up/down states from the peer's substream.
    """

    def __init__(self, intervals: Optional[Sequence[tuple[float, float]]] = None):
        # None means always up.
        self._intervals = None if intervals is None else [tuple(iv) for iv in intervals]
        if self._intervals is not None:
            prev = float("-inf")
            for start, end in self._intervals:
                if start < prev or end < start:
                    raise ValueError("up intervals must be ordered and disjoint")
                prev = end

    @classmethod
    def always_up(cls) -> "AvailabilitySchedule":
        return cls(None)

    @classmethod
    def bernoulli(
        cls,
        up_probability: float,
        horizon: float,
        epoch_seconds: float,
        rng: random.Random,
    ) -> "AvailabilitySchedule":
        """Each epoch of ``epoch_seconds`` is independently up or down."""
        if not 0.0 <= up_probability <= 1.0:
            raise ValueError("up_probability must lie in [0, 1]")
        if up_probability == 1.0:
            return cls.always_up()
        if epoch_seconds <= 0:
            raise ValueError("epoch_seconds must be positive")
        intervals = []
        t = 0.0
        while t < horizon:
            end = min(t + epoch_seconds, horizon)
            if rng.random() < up_probability:
                if intervals and intervals[-1][1] == t:
                    intervals[-1] = (intervals[-1][0], end)
                else:
                    intervals.append((t, end))
            t = end
        return cls(intervals)

    def is_up(self, t: float) -> bool:
        if self._intervals is None:
            return True
        return any(start <= t <= end for start, end in self._intervals)

    def is_up_during(self, start: float, end: float) -> bool:
        """True iff the peer stays up over the whole [start, end] span."""
        if self._intervals is None:
            return True
        return any(s <= start and end <= e for s, e in self._intervals)

    def up_intervals(self, start: float, end: float) -> list[tuple[float, float]]:
        """Up intervals clipped to [start, end], ordered and disjoint."""
        if self._intervals is None:
            return [(start, end)] if end > start else []
        clipped = []
        for s, e in self._intervals:
            lo, hi = max(s, start), min(e, end)
            if hi > lo:
                clipped.append((lo, hi))
        return clipped

    def up_fraction(self, start: float, end: float) -> float:
        if end <= start:
            return 0.0
        covered = sum(e - s for s, e in self.up_intervals(start, end))
        return covered / (end - start)


@dataclass(frozen=True)
class PeerProfile:
    """Ground-truth behavior of one task processor peer."""

    peer_id: str
    processing_seconds_per_unit: float
    one_way_latency: float
    schedule: AvailabilitySchedule = field(default_factory=AvailabilitySchedule.always_up)
    error_probability: float = 0.0
    abandon_probability: float = 0.0
    local_load_factor: float = 1.0
    serialization_delay_per_unit: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.error_probability <= 1.0:
            raise ValueError(f"peer {self.peer_id}: error_probability out of [0, 1]")
        if not 0.0 <= self.abandon_probability <= 1.0:
            raise ValueError(f"peer {self.peer_id}: abandon_probability out of [0, 1]")
        if self.one_way_latency < 0 or self.processing_seconds_per_unit < 0:
            raise ValueError(f"peer {self.peer_id}: latency and processing must be >= 0")
        if self.local_load_factor < 1.0:
            raise ValueError(f"peer {self.peer_id}: local_load_factor must be >= 1")
        if self.serialization_delay_per_unit < 0:
            raise ValueError(f"peer {self.peer_id}: serialization delay must be >= 0")

    def batch_work_seconds(self, batch_size: int) -> float:
        return batch_size * (
            self.processing_seconds_per_unit * self.local_load_factor
            + self.serialization_delay_per_unit
        )


def simulate_batch(
    profile: PeerProfile,
    batch_size: int,
    dispatch_time: float,
    rng: random.Random,
) -> tuple[ResultKind, Optional[float]]:
    """Outcome of dispatching a batch: (kind, reply arrival time or None).

    An abandoned batch, or one whose processing span falls outside the
    peer's up time, never replies; the distributor's timeout turns it into
    an incomplete result.
    """
    if batch_size < 1:
        raise ValueError("batch size must be >= 1")
    if rng.random() < profile.abandon_probability:
        return ResultKind.INCOMPLETE, None
    arrival = dispatch_time + profile.one_way_latency
    work = profile.batch_work_seconds(batch_size)
    if not profile.schedule.is_up_during(arrival, arrival + work):
        return ResultKind.INCOMPLETE, None
    reply_time = arrival + work + profile.one_way_latency
    kind = ResultKind.ERRONEOUS if rng.random() < profile.error_probability else ResultKind.CORRECT
    return kind, reply_time
