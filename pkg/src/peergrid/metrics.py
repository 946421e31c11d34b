"""Per-peer credibility counters and computation-time estimation.

Credibility is the fraction of a peer's completed tasks whose results were
correct; computation time is the peer's declared idle time scaled by the
fraction of it actually spent serving the system.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

from .task_model import ResultKind


@dataclass(frozen=True)
class CredibilityCounters:
    """Tallies of correct, erroneous, and incomplete results for one peer."""

    correct: int = 0
    erroneous: int = 0
    incomplete: int = 0

    def __post_init__(self):
        if self.correct < 0 or self.erroneous < 0 or self.incomplete < 0:
            raise ValueError("counters must be non-negative")

    @property
    def total(self) -> int:
        return self.correct + self.erroneous + self.incomplete


@dataclass(frozen=True)
class AvailabilityObservation:
    """Idle time over an observation horizon and the fraction served."""

    idle_time: float  # seconds
    availability: float  # fraction of idle_time in [0, 1]

    def __post_init__(self):
        if self.idle_time < 0:
            raise ValueError("idle_time must be >= 0")
        if not 0.0 <= self.availability <= 1.0:
            raise ValueError("availability must lie in [0, 1]")


@dataclass(frozen=True)
class PeerSnapshot:
    """The observed triple used for classification.

    ``credibility`` and ``distance`` are None while unmeasured; the
    selection protocol probes every candidate first, so classification
    only ever sees fully measured snapshots.
    """

    peer_id: str
    credibility: Optional[float]
    computation_time: float
    distance: Optional[float]


def record_result(counters: CredibilityCounters, kind: ResultKind) -> CredibilityCounters:
    """Return counters with exactly the tally matching ``kind`` incremented."""
    if kind is ResultKind.CORRECT:
        return CredibilityCounters(counters.correct + 1, counters.erroneous, counters.incomplete)
    if kind is ResultKind.ERRONEOUS:
        return CredibilityCounters(counters.correct, counters.erroneous + 1, counters.incomplete)
    return CredibilityCounters(counters.correct, counters.erroneous, counters.incomplete + 1)


def credibility(counters: CredibilityCounters) -> Optional[float]:
    """Fraction of results that were correct, or None with no observations.

    None is deliberately distinct from 0.0: a peer that has never been
    probed is unmeasured, not non-credible.
    """
    if counters.total == 0:
        return None
    return counters.correct / counters.total


def computation_time(obs: AvailabilityObservation) -> float:
    """Expected seconds the peer serves system computations: IT x A_P."""
    return obs.idle_time * obs.availability


def estimate_availability(
    up_intervals: Sequence[tuple[float, float]],
    horizon: tuple[float, float],
) -> AvailabilityObservation:
    """Derive an availability observation from a peer's up-time intervals.

    ``up_intervals`` must be disjoint, ordered, and contained in ``horizon``.
    """
    h_start, h_end = horizon
    length = h_end - h_start
    if length <= 0:
        raise ValueError("observation horizon must have positive length")
    prev_end = h_start
    covered = 0.0
    for start, end in up_intervals:
        if start < prev_end or end < start or end > h_end:
            raise ValueError("up intervals must be disjoint, ordered, and inside the horizon")
        covered += end - start
        prev_end = end
    return AvailabilityObservation(idle_time=length, availability=covered / length)
