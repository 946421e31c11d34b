"""Peer classification and efficient-group selection.

Responding peers are first placed in coarse quadrants by comparing their
computation time and turnaround distance against the population averages,
then refined into peer groups PG1..PG4 by a credibility threshold. PG1 is
the efficient set allowed to process deadline-driven tasks.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .metrics import PeerSnapshot


class CoarseClass(Enum):
    """Quadrant by (computation time vs average) x (distance vs average)."""

    G1 = "G1"  # high computation time, low distance
    G2 = "G2"  # high computation time, high distance
    G3 = "G3"  # low computation time, low distance
    G4 = "G4"  # low computation time, high distance


class PeerGroup(Enum):
    PG1 = "PG1"
    PG2 = "PG2"
    PG3 = "PG3"
    PG4 = "PG4"


@dataclass(frozen=True)
class PopulationAverages:
    """Arithmetic means over the responding peers of one selection epoch."""

    credibility: float
    computation_time: float
    distance: float
    population_size: int


def _mean(values: Sequence[float]) -> float:
    # Identical inputs short-circuit so boundary comparisons (x >= mean)
    # stay exact instead of drifting by a rounding ulp.
    if min(values) == max(values):
        return values[0]
    return math.fsum(values) / len(values)


def population_averages(snapshots: Sequence[PeerSnapshot]) -> PopulationAverages:
    """Means of credibility, computation time, and distance over responders."""
    if not snapshots:
        raise ValueError("cannot average an empty population")
    for snap in snapshots:
        if snap.credibility is None or snap.distance is None:
            raise ValueError(f"peer {snap.peer_id} is not fully measured")
    return PopulationAverages(
        credibility=_mean([s.credibility for s in snapshots]),
        computation_time=_mean([s.computation_time for s in snapshots]),
        distance=_mean([s.distance for s in snapshots]),
        population_size=len(snapshots),
    )


def classify_coarse(snapshot: PeerSnapshot, averages: PopulationAverages) -> CoarseClass:
    """Quadrant placement; boundaries are inclusive on the favorable side."""
    fast = snapshot.computation_time >= averages.computation_time
    near = snapshot.distance <= averages.distance
    if fast:
        return CoarseClass.G1 if near else CoarseClass.G2
    return CoarseClass.G3 if near else CoarseClass.G4


def assign_group(coarse: CoarseClass, credibility: float, mu: float) -> PeerGroup:
    """Refine a quadrant into a peer group via the credibility threshold.

    G3 and G4 peers land in PG3/PG4 regardless of credibility.
    """
    if coarse is CoarseClass.G1:
        return PeerGroup.PG1 if credibility >= mu else PeerGroup.PG3
    if coarse is CoarseClass.G2:
        return PeerGroup.PG2 if credibility >= mu else PeerGroup.PG4
    if coarse is CoarseClass.G3:
        return PeerGroup.PG3
    return PeerGroup.PG4


def classify_population(
    snapshots: Sequence[PeerSnapshot], mu: float
) -> dict[str, tuple[CoarseClass, PeerGroup]]:
    """Coarse class and peer group for every snapshot, keyed by peer id."""
    if not snapshots:
        return {}
    averages = population_averages(snapshots)
    out = {}
    for snap in snapshots:
        coarse = classify_coarse(snap, averages)
        out[snap.peer_id] = (coarse, assign_group(coarse, snap.credibility, mu))
    return out


def select_efficient(snapshots: Sequence[PeerSnapshot], mu: float) -> set[str]:
    """Peers classified PG1: credible, fast, and near; only they may serve
    deadline-driven tasks."""
    groups = classify_population(snapshots, mu)
    return {peer for peer, (_, group) in groups.items() if group is PeerGroup.PG1}


def group_members(
    groups: dict[str, tuple[CoarseClass, PeerGroup]], group: PeerGroup
) -> list[str]:
    """Sorted peer ids assigned to ``group`` (deterministic reporting order)."""
    return sorted(p for p, (_, g) in groups.items() if g is group)
