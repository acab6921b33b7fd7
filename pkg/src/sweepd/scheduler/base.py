"""Uniform scheduler interface: submit / status / delete.

Every backend maps its dialect onto exactly three observable job states
(queued, running, finished) and forgets completed jobs; an unknown
job_id therefore reports finished, never an error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol

JOB_STATES = ("queued", "running", "finished")
_STATE_ORDER = {s: i for i, s in enumerate(JOB_STATES)}


@dataclass(frozen=True)
class SchedulerRequest:
    script_path: str
    work_dir: str
    parameters: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SchedulerJobStatus:
    job_id: str
    state: str

    def __post_init__(self):
        if self.state not in JOB_STATES:
            raise ValueError(f"unknown job state {self.state!r}")


def state_at_least(a: str, b: str) -> bool:
    return _STATE_ORDER[a] >= _STATE_ORDER[b]


class SchedulerClient(Protocol):
    """What the worker sees; identical across every backend."""

    def submit(self, request: SchedulerRequest) -> str: ...

    def status(self, job_id: str) -> SchedulerJobStatus: ...

    def delete(self, job_id: str) -> None: ...
