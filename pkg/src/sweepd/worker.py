"""The worker: a polling loop that drives every job to a terminal state.

Each cycle dispatches created jobs within per-host concurrency budgets,
polls the scheduler for submitted/running jobs, and collects whatever
the scheduler reports finished.  A failure in any one job is recorded in
the cycle report and never aborts the cycle.  Restart recovery is
re-adoption: stored job_ids are simply polled again, and jobs the
scheduler no longer knows are treated as finished and collected.
"""
from __future__ import annotations

import logging
import signal
import threading
from dataclasses import dataclass, field

from .errors import SweepdError, ValidationError
from .executor import Executor
from .model import TERMINAL_STATUSES
from .scheduler import SchedulerRegistry
from .store import Storage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WorkerConfig:
    poll_interval_seconds: float = 5.0
    max_dispatch_per_cycle: int = 10
    shutdown_grace_seconds: float = 30.0

    def __post_init__(self):
        if (self.poll_interval_seconds <= 0 or self.max_dispatch_per_cycle <= 0
                or self.shutdown_grace_seconds <= 0):
            raise ValidationError("worker config values must be positive")


@dataclass
class CycleReport:
    dispatched: int = 0
    polled: int = 0
    collected: int = 0
    errors: list[str] = field(default_factory=list)


class Worker:
    def __init__(self, storage: Storage, config: WorkerConfig | None = None,
                 registry: SchedulerRegistry | None = None,
                 executor: Executor | None = None):
        self.storage = storage
        self.config = config or WorkerConfig()
        self.registry = registry or SchedulerRegistry(storage.data_root)
        self.executor = executor or Executor(storage, self.registry)
        self._stop = threading.Event()

    # -- one cycle -----------------------------------------------------------

    def _jobs(self, status_filter) -> list:
        docs = self.storage.documents
        jobs = [r for r in docs.query("runs") if r.status in status_filter]
        jobs += [a for a in docs.query("analyses") if a.status in status_filter]
        jobs.sort(key=lambda j: (j.created_at, j.id))
        return jobs

    def cycle(self) -> CycleReport:
        report = CycleReport()
        docs = self.storage.documents
        hosts = {h.id: h for h in docs.query("hosts")}

        in_flight = self._jobs(("submitted", "running"))
        in_flight_count: dict[str, int] = {}
        for job in in_flight:
            in_flight_count[job.host_id] = in_flight_count.get(job.host_id, 0) + 1

        # 1. dispatch created jobs within each host's budget
        dispatched_on: dict[str, int] = {}
        for job in self._jobs(("created",)):
            host = hosts.get(job.host_id)
            if host is None:
                report.errors.append(f"{job.id}: unknown host {job.host_id}")
                continue
            if (in_flight_count.get(host.id, 0) >= host.max_concurrent_jobs
                    or dispatched_on.get(host.id, 0) >= self.config.max_dispatch_per_cycle):
                continue
            try:
                updated = self.executor.dispatch(job)
            except SweepdError as exc:
                report.errors.append(f"dispatch {job.id}: {exc}")
                continue
            if updated.status == "submitted":
                report.dispatched += 1
                in_flight_count[host.id] = in_flight_count.get(host.id, 0) + 1
                dispatched_on[host.id] = dispatched_on.get(host.id, 0) + 1

        # 2+3. poll in-flight jobs and collect the finished ones
        for job in self._jobs(("submitted", "running")):
            try:
                job, scheduler_state = self.executor.poll(job)
            except SweepdError as exc:
                report.errors.append(f"poll {job.id}: {exc}")
                continue
            report.polled += 1
            if scheduler_state != "finished":
                continue
            try:
                done = self.executor.collect(job)
            except SweepdError as exc:
                report.errors.append(f"collect {job.id}: {exc}")
                continue
            if done.status in TERMINAL_STATUSES:
                report.collected += 1

        return report

    # -- the loop -------------------------------------------------------------

    def request_stop(self) -> None:
        self._stop.set()

    def run_loop(self, max_cycles: int | None = None, install_signals: bool = True,
                 repair_first: bool = True) -> None:
        """Cycle until stopped; finishes the in-progress cycle on shutdown."""
        if install_signals:
            for sig in (signal.SIGTERM, signal.SIGINT):
                signal.signal(sig, lambda *_: self.request_stop())
        if repair_first:
            repaired = self.storage.repair()
            if any(repaired.values()):
                logger.info("startup repair: %s", repaired)
        cycles = 0
        while not self._stop.is_set():
            report = self.cycle()
            cycles += 1
            logger.info("cycle %d: dispatched=%d polled=%d collected=%d errors=%d",
                        cycles, report.dispatched, report.polled, report.collected,
                        len(report.errors))
            for err in report.errors:
                logger.warning("cycle %d: %s", cycles, err)
            if max_cycles is not None and cycles >= max_cycles:
                break
            self._stop.wait(self.config.poll_interval_seconds)
        logger.info("worker stopped after %d cycles", cycles)
