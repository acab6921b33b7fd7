"""Simulated backend: a deterministic scheduler on a manual clock.

Jobs carry a scripted duration (``sim_duration`` submit parameter) and
move queued -> running -> finished as the clock advances; a bounded
capacity holds later submissions in the queue.  When a job crosses its
finish time its script is executed synchronously in the work directory,
so the rest of the pipeline (archive download, collection) behaves
exactly as it does under a real backend.
"""
from __future__ import annotations

import logging
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import SubmitRejected
from .base import SchedulerJobStatus, SchedulerRequest

logger = logging.getLogger(__name__)


@dataclass
class _SimJob:
    job_id: str
    script_path: str
    work_dir: str
    duration: float
    state: str = "queued"
    started_at: Optional[float] = None
    finish_at: Optional[float] = None
    terminated: bool = False
    order: int = 0


@dataclass
class SimulatedBackend:
    capacity: Optional[int] = None
    default_duration: float = 1.0
    auto_advance: float = 0.0
    run_scripts: bool = True
    clock: float = field(default=0.0, init=False)

    def __post_init__(self):
        self._jobs: dict[str, _SimJob] = {}
        self._counter = 0
        self._lock = threading.RLock()

    # -- public interface --------------------------------------------------

    def submit(self, request: SchedulerRequest) -> str:
        if not Path(request.script_path).exists():
            raise SubmitRejected(f"script not found: {request.script_path}")
        with self._lock:
            self._counter += 1
            job_id = f"s-{self._counter:06d}"
            duration = float(request.parameters.get("sim_duration", self.default_duration))
            job = _SimJob(job_id, request.script_path, request.work_dir,
                          duration, order=self._counter)
            self._jobs[job_id] = job
            self._start_eligible()
        return job_id

    def status(self, job_id: str) -> SchedulerJobStatus:
        with self._lock:
            if self.auto_advance > 0:
                self._advance_to(self.clock + self.auto_advance)
            job = self._jobs.get(job_id)
            if job is None:
                return SchedulerJobStatus(job_id, "finished")
            return SchedulerJobStatus(job_id, job.state)

    def delete(self, job_id: str) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.state == "finished":
                return
            job.state = "finished"
            job.terminated = True
            job.finish_at = self.clock
            self._start_eligible()

    def advance_time(self, seconds: float) -> None:
        with self._lock:
            self._advance_to(self.clock + seconds)

    # -- timeline ------------------------------------------------------------

    def _running(self) -> list[_SimJob]:
        return [j for j in self._jobs.values() if j.state == "running"]

    def _start_eligible(self) -> None:
        queued = sorted((j for j in self._jobs.values() if j.state == "queued"),
                        key=lambda j: j.order)
        for job in queued:
            if self.capacity is not None and len(self._running()) >= self.capacity:
                break
            job.state = "running"
            job.started_at = self.clock
            job.finish_at = self.clock + job.duration
            logger.debug("sim job %s running at t=%s", job.job_id, self.clock)

    def _advance_to(self, target: float) -> None:
        while True:
            running = self._running()
            next_finish = min((j.finish_at for j in running), default=None)
            if next_finish is None or next_finish > target:
                break
            self.clock = next_finish
            for job in sorted(running, key=lambda j: (j.finish_at, j.order)):
                if job.finish_at <= self.clock and job.state == "running":
                    self._finish(job)
            self._start_eligible()
        self.clock = max(self.clock, target)

    def _finish(self, job: _SimJob) -> None:
        job.state = "finished"
        logger.debug("sim job %s finished at t=%s", job.job_id, self.clock)
        if self.run_scripts and not job.terminated:
            try:
                subprocess.run(["bash", job.script_path], cwd=job.work_dir,
                               capture_output=True, timeout=120, check=False)
            except (OSError, subprocess.TimeoutExpired) as exc:
                logger.warning("sim job %s script failed: %s", job.job_id, exc)
