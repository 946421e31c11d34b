"""Peer-selection library and deterministic simulator for deadline-driven
P2P desktop-grid computing.

Peers are scored on credibility (fraction of correct results), computation
time (idle time x availability), and application-level turnaround distance;
the efficient group PG1 is the set of credible peers at or above the average
computation time and at or below the average distance.
"""

from .task_model import Assignment, JobSpec, ResultKind, ResultRecord, TaskUnit, is_successful, split_job
from .metrics import (
    AvailabilityObservation,
    CredibilityCounters,
    PeerSnapshot,
    computation_time,
    credibility,
    estimate_availability,
    record_result,
)
from .distance import (
    DispatchEntry,
    PassiveDistanceTap,
    ProtocolError,
    TaskIdTable,
    TurnaroundTable,
    discard_dispatch,
    lookup_distance,
    measure_turnaround,
    record_dispatch,
    record_result_distance,
)
from .selection import (
    CoarseClass,
    PeerGroup,
    PopulationAverages,
    assign_group,
    classify_coarse,
    classify_population,
    population_averages,
    select_efficient,
)
from .simnet import AvailabilitySchedule, Event, EventKind, PeerProfile, SimClock, peer_rng, simulate_batch
from .distributor import Distributor, EpochReport, PeerReportRow
from .harness import (
    ConfigError,
    RunSummary,
    ScenarioConfig,
    emit_report,
    load_config,
    parse_config,
    run_experiment,
    run_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
