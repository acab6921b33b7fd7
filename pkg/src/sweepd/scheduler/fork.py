"""Fork backend: jobs are detached local processes.

Each submission spawns the job script in its own session and records a
small JSON file under the state directory, so a different process (the
wrapper CLI, or a restarted worker) can still poll or kill the job.
"""
from __future__ import annotations

import json
import logging
import os
import signal
import subprocess
import threading
from pathlib import Path

from ..errors import SubmitRejected
from .base import SchedulerJobStatus, SchedulerRequest

logger = logging.getLogger(__name__)


def _pid_running(pid: int) -> bool:
    # /proc check so zombies (reaped by nobody yet) count as finished
    try:
        with open(f"/proc/{pid}/stat") as fh:
            state = fh.read().rsplit(")", 1)[1].split()[0]
        return state not in ("Z", "X")
    except (FileNotFoundError, ProcessLookupError, IndexError):
        pass
    except OSError:
        pass
    try:
        os.kill(pid, 0)
        return True
    except (ProcessLookupError, PermissionError):
        return False


class ForkBackend:
    """Runs job scripts as local child processes, one per submission."""

    def __init__(self, state_dir: str | Path):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self._procs: dict[str, subprocess.Popen] = {}
        self._lock = threading.Lock()

    def _record_path(self, job_id: str) -> Path:
        return self.state_dir / f"{job_id}.json"

    def _next_job_id(self) -> tuple[str, int]:
        """Claim the next free f-NNNNNN id with an exclusive create."""
        existing = [int(p.stem.split("-")[1]) for p in self.state_dir.glob("f-*.json")]
        n = max(existing, default=0) + 1
        while True:
            job_id = f"f-{n:06d}"
            try:
                fd = os.open(self._record_path(job_id), os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                return job_id, fd
            except FileExistsError:
                n += 1

    def submit(self, request: SchedulerRequest) -> str:
        script = Path(request.script_path)
        if not script.exists():
            raise SubmitRejected(f"script not found: {script}")
        if not Path(request.work_dir).is_dir():
            raise SubmitRejected(f"work directory not found: {request.work_dir}")
        with self._lock:
            job_id, fd = self._next_job_id()
            log_path = script.with_suffix(".log")
            try:
                with open(log_path, "ab") as log:
                    proc = subprocess.Popen(
                        ["bash", str(script)],
                        cwd=request.work_dir,
                        stdout=log, stderr=log,
                        start_new_session=True,
                    )
            except OSError as exc:
                os.close(fd)
                self._record_path(job_id).unlink(missing_ok=True)
                raise SubmitRejected(f"spawn failed: {exc}") from exc
            record = {"pid": proc.pid, "script": str(script), "work_dir": request.work_dir}
            with os.fdopen(fd, "w") as fh:
                json.dump(record, fh)
            self._procs[job_id] = proc
            logger.debug("fork job %s pid %d: %s", job_id, proc.pid, script)
        return job_id

    def status(self, job_id: str) -> SchedulerJobStatus:
        proc = self._procs.get(job_id)
        if proc is not None:
            state = "running" if proc.poll() is None else "finished"
            return SchedulerJobStatus(job_id, state)
        record_path = self._record_path(job_id)
        if record_path.exists():
            try:
                pid = json.loads(record_path.read_text())["pid"]
            except (json.JSONDecodeError, KeyError):
                return SchedulerJobStatus(job_id, "finished")
            state = "running" if _pid_running(pid) else "finished"
            return SchedulerJobStatus(job_id, state)
        # schedulers forget completed jobs
        return SchedulerJobStatus(job_id, "finished")

    def delete(self, job_id: str) -> None:
        pid = None
        proc = self._procs.get(job_id)
        if proc is not None and proc.poll() is None:
            pid = proc.pid
        elif self._record_path(job_id).exists():
            try:
                pid = json.loads(self._record_path(job_id).read_text())["pid"]
            except (json.JSONDecodeError, KeyError):
                pid = None
        if pid is not None and _pid_running(pid):
            try:
                os.killpg(pid, signal.SIGTERM)
            except (ProcessLookupError, PermissionError):
                pass
            except OSError:
                try:
                    os.kill(pid, signal.SIGTERM)
                except (ProcessLookupError, PermissionError):
                    pass
