"""Jobs, task units, assignments, and result kinds.

All types are immutable value records shared by the rest of the package.
"""

from dataclasses import dataclass
from enum import Enum


class ResultKind(Enum):
    """Classification of one returned (or missing) batch result."""

    CORRECT = "correct"
    ERRONEOUS = "erroneous"
    INCOMPLETE = "incomplete"


@dataclass(frozen=True)
class JobSpec:
    """A deadline-driven job, sized as a whole number of task units."""

    job_id: str
    arrival_time: float
    deadline: float  # absolute simulated seconds
    size: int  # number of task units

    def __post_init__(self):
        if self.deadline <= self.arrival_time:
            raise ValueError(
                f"job {self.job_id}: deadline ({self.deadline}) must be "
                f"after arrival ({self.arrival_time})"
            )
        if self.size < 1:
            raise ValueError(f"job {self.job_id}: size must be >= 1, got {self.size}")


@dataclass(frozen=True)
class TaskUnit:
    """The smallest indivisible piece of a job; equal-sized within a job."""

    unit_id: str
    job_id: str
    unit_size: float = 1.0


@dataclass(frozen=True)
class Assignment:
    """A dispatched batch of task units addressed to one processor peer."""

    task_id: str
    peer_id: str
    unit_ids: tuple
    dispatch_time: float

    def __post_init__(self):
        if len(self.unit_ids) < 1:
            raise ValueError(f"assignment {self.task_id}: empty unit list")

    @property
    def batch_size(self) -> int:
        return len(self.unit_ids)


@dataclass(frozen=True)
class ResultRecord:
    """One processed result: who returned what, and when."""

    task_id: str
    peer_id: str
    kind: ResultKind
    completion_time: float


def split_job(job: JobSpec) -> list[TaskUnit]:
    """Split a job into its ``size`` equal task units.

    Unit ids are (job_id, index) pairs rendered as strings, so splitting
    is deterministic and replayable.
    """
    if job.size < 1:
        raise ValueError(f"job {job.job_id}: cannot split a job of size {job.size}")
    return [
        TaskUnit(unit_id=f"{job.job_id}#{i}", job_id=job.job_id)
        for i in range(job.size)
    ]


def is_successful(job: JobSpec, finish_time: float) -> bool:
    """A job succeeds iff it finishes on or before its deadline."""
    return finish_time <= job.deadline
