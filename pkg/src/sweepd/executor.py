"""Per-job execution pipeline: stage, submit, collect.

For each job the executor creates a work directory on the host, stages
inputs, uploads a generated shell script, submits it through the
scheduler client, and, once the scheduler reports completion, downloads
the archived work directory, unpacks it into the file store, parses the
reserved files into the record, and seals the result.

Crash points are survivable: a submission writes a claim marker before
doing anything in the work directory, so a re-dispatched job either
adopts the earlier submission's archive or waits for it instead of
running the simulation twice.
"""
from __future__ import annotations

import json
import logging
import shlex
import shutil
import tarfile
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

from . import model
from .analysis import stage_analysis_input
from .errors import (
    AlreadySealed,
    CorruptArchive,
    MalformedStatusFile,
    SubmitRejected,
    SweepdError,
    TransportFailure,
)
from .model import Host, ParameterSet, Run, Simulator
from .scheduler import SchedulerRegistry, SchedulerRequest, header_lines
from .store import Storage
from .transport import transport_for

logger = logging.getLogger(__name__)

DEFAULT_MAX_ARCHIVE_ATTEMPTS = 5


@dataclass(frozen=True)
class JobScript:
    text: str
    reserved_outputs: tuple[str, ...] = model.RESERVED_OUTPUT_FILES
    archive_name: str = ""


@dataclass(frozen=True)
class WorkPaths:
    work_dir: str
    script: str
    archive: str
    claim: str

    @classmethod
    def for_job(cls, host: Host, job_id: str) -> "WorkPaths":
        base = host.work_base_dir.rstrip("/")
        return cls(
            work_dir=f"{base}/{job_id}",
            script=f"{base}/{job_id}.sh",
            archive=f"{base}/{job_id}.tar.gz",
            claim=f"{base}/{job_id}.claim",
        )


# --- command and input rendering ---------------------------------------

def render_arg(value) -> str:
    """One command-line argument: canonical numbers, shell-quoted strings."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return shlex.quote(value)


def render_command(simulator: Simulator, parameter_set: ParameterSet, run: Run) -> str:
    """The exact command line the job script will execute for a run."""
    if simulator.input_mode == "json_file":
        return simulator.command
    ordered = sorted(simulator.parameter_definitions, key=lambda d: d.position)
    args = [render_arg(parameter_set.values[d.name]) for d in ordered]
    args.append(str(run.seed))
    return " ".join([simulator.command] + args)


def render_analyzer_command(analyzer, values: dict) -> str:
    if analyzer.input_mode == "json_file":
        return analyzer.command
    ordered = sorted(analyzer.parameter_definitions, key=lambda d: d.position)
    return " ".join([analyzer.command] + [render_arg(values[d.name]) for d in ordered])


def input_file_payload(simulator: Simulator, parameter_set: ParameterSet, run: Run) -> str:
    """Contents of ``_input.json``: the full value map plus the seed."""
    ordered = sorted(simulator.parameter_definitions, key=lambda d: d.position)
    payload = {d.name: parameter_set.values[d.name] for d in ordered}
    payload["_seed"] = run.seed
    return json.dumps(payload, separators=(",", ":")) + "\n"


def stage_input(transport, simulator: Simulator, parameter_set: ParameterSet,
                run: Run, work_dir: str) -> None:
    """Write ``_input.json`` for json_file-mode simulators; no-op otherwise."""
    if simulator.input_mode != "json_file":
        return
    data = input_file_payload(simulator, parameter_set, run).encode("utf-8")
    transport.upload_bytes(data, f"{work_dir}/_input.json")


def generate_job_script(command: str, job_id: str, host: Host,
                        version_command: str = "") -> JobScript:
    """Deterministic job script: run, record, archive.

    The script claims the job (so a duplicate submission of the same job
    exits without touching the work directory), runs the command with the
    work directory current, writes the three reserved files whether the
    command succeeded or not, and atomically publishes the archive.
    Staged inputs are excluded from the archive so the collected result
    holds exactly the command's outputs plus the reserved files.
    """
    base = host.work_base_dir.rstrip("/")
    paths = WorkPaths.for_job(host, job_id)
    headers = header_lines(host.scheduler_template, host.scheduler_params)
    version_line = (f"( {version_command} ) > _version.txt 2>/dev/null || : > _version.txt"
                    if version_command else ": > _version.txt")
    lines = ["#!/bin/bash"]
    lines.extend(headers)
    lines.extend([
        f'mkdir {shlex.quote(paths.claim)} 2>/dev/null || exit 97',
        f'cd {shlex.quote(paths.work_dir)} || exit 99',
        'START_TS=$(date +%s)',
        command,
        'RC=$?',
        'END_TS=$(date +%s)',
        'echo "$((END_TS - START_TS))" > _time.txt',
        'printf \'{"exit_code": %d, "finished_at": "%s"}\\n\' "$RC" '
        '"$(date -u +%Y-%m-%dT%H:%M:%SZ)" > _status.json',
        version_line,
        f'cd {shlex.quote(base)}',
        f'tar -czf {shlex.quote(job_id + ".tar.gz.part")} '
        f"--exclude={shlex.quote(job_id + '/_input.json')} "
        f"--exclude={shlex.quote(job_id + '/_input')} "
        f'{shlex.quote(job_id)}',
        f'mv {shlex.quote(job_id + ".tar.gz.part")} {shlex.quote(job_id + ".tar.gz")}',
        'exit $RC',
        '',
    ])
    return JobScript(text="\n".join(lines), archive_name=f"{job_id}.tar.gz")


# --- the pipeline -------------------------------------------------------

class Executor:
    """Drives dispatch and collection against one storage root."""

    def __init__(self, storage: Storage, registry: SchedulerRegistry,
                 max_archive_attempts: int = DEFAULT_MAX_ARCHIVE_ATTEMPTS,
                 crash_hook: Optional[Callable[[str], None]] = None):
        self.storage = storage
        self.documents = storage.documents
        self.registry = registry
        self.max_archive_attempts = max_archive_attempts
        self.crash_hook = crash_hook

    def _hook(self, point: str) -> None:
        if self.crash_hook is not None:
            self.crash_hook(point)

    @staticmethod
    def _collection(job) -> str:
        return "runs" if isinstance(job, Run) else "analyses"

    def _host(self, job) -> Host:
        return self.documents.get("hosts", job.host_id)

    # -- dispatch ---------------------------------------------------------

    def dispatch(self, job):
        """Move one created job to submitted; safe to retry after any crash."""
        collection = self._collection(job)
        host = self._host(job)
        transport = transport_for(host)
        client = self.registry.resolve(host)
        paths = WorkPaths.for_job(host, job.id)

        if job.dispatch_attempts > 0 and transport.exists(paths.claim):
            # an earlier submission reached the script; never run it again
            if transport.exists(paths.archive):
                adopted = model.transition(job, "submitted", job_id=f"readopt-{job.id}")
                if self.documents.cas_status(collection, job.id, "created", adopted):
                    logger.info("%s %s: adopted archive from earlier submission", collection, job.id)
                    return adopted
                return self.documents.get(collection, job.id)
            logger.debug("%s %s: earlier submission still in flight", collection, job.id)
            return job

        # record the attempt before any remote effect; the status guard also
        # drops dispatchers holding a stale snapshot of an already-moved job
        job = replace(job, dispatch_attempts=job.dispatch_attempts + 1)
        if not self.documents.cas_status(collection, job.id, "created", job):
            return self.documents.get(collection, job.id)
        try:
            transport.mkdirs(paths.work_dir)
            self._hook("dispatch:after-mkdir")
            script_text, job = self._stage(transport, job, paths)
            self._hook("dispatch:after-stage")
            transport.upload_bytes(script_text.encode("utf-8"), paths.script)
            self._hook("dispatch:after-upload")
            job_id = client.submit(SchedulerRequest(paths.script, paths.work_dir,
                                                    dict(host.scheduler_params)))
        except (TransportFailure, SubmitRejected) as exc:
            noted = model.append_note(job, f"dispatch failed: {exc}")
            self.documents.cas_status(collection, job.id, "created", noted)
            logger.warning("%s %s: dispatch failed: %s", collection, job.id, exc)
            return noted
        self._hook("dispatch:after-submit")
        submitted = model.transition(job, "submitted", job_id=job_id)
        if not self.documents.cas_status(collection, job.id, "created", submitted):
            # another worker won; abandon our duplicate, the claim guard
            # in the script keeps it from executing twice
            return self.documents.get(collection, job.id)
        logger.info("%s %s: submitted as %s", collection, job.id, job_id)
        return submitted

    def _stage(self, transport, job, paths: WorkPaths):
        if isinstance(job, Run):
            ps = self.documents.get("parameter_sets", job.parameter_set_id)
            simulator = self.documents.get("simulators", ps.simulator_id)
            stage_input(transport, simulator, ps, job, paths.work_dir)
            command = render_command(simulator, ps, job)
            version_command = simulator.version_command
        else:
            analyzer = self.documents.get("analyzers", job.analyzer_id)
            staged = stage_analysis_input(transport, self.storage, job, paths.work_dir)
            if staged.input_run_ids != job.input_run_ids:
                self.documents.update(staged)
                job = staged
            command = render_analyzer_command(analyzer, job.values)
            version_command = analyzer.version_command
        host = self._host(job)
        return generate_job_script(command, job.id, host, version_command).text, job

    # -- polling ----------------------------------------------------------

    def poll(self, job):
        """Refresh one submitted/running job from the scheduler.

        Returns (job, scheduler_state).
        """
        collection = self._collection(job)
        host = self._host(job)
        client = self.registry.resolve(host)
        status = client.status(job.job_id)
        self._hook("poll:after-status")
        if status.state == "running" and job.status == "submitted":
            started = model.transition(job, "started")
            if self.documents.cas_status(collection, job.id, "submitted", started):
                job = started
            else:
                job = self.documents.get(collection, job.id)
            self._hook("poll:after-started")
        return job, status.state

    # -- collection ---------------------------------------------------------

    def collect(self, job):
        """Download, unpack, verify, and record one scheduler-finished job."""
        collection = self._collection(job)
        host = self._host(job)
        transport = transport_for(host)
        paths = WorkPaths.for_job(host, job.id)
        rel_dir = self.storage.rel_dir_for(job)

        if job.status == "submitted":
            # the scheduler saw it run to completion; record the start
            started = model.transition(job, "started")
            if self.documents.cas_status(collection, job.id, "submitted", started):
                job = started
            else:
                job = self.documents.get(collection, job.id)
        if job.status != "running":
            return job

        if self.storage.files.is_sealed(rel_dir):
            # sealed by an earlier collect that died before the final write
            return self._finalize_from_dir(job, rel_dir, paths, transport)

        if not transport.exists(paths.archive):
            job = replace(job, collect_attempts=job.collect_attempts + 1)
            if job.collect_attempts >= self.max_archive_attempts:
                return self._fail_infra(job, rel_dir,
                                        f"archive missing after {job.collect_attempts} attempts")
            self.documents.cas_status(collection, job.id, "running", job)
            logger.debug("%s %s: archive not there yet (attempt %d)",
                         collection, job.id, job.collect_attempts)
            return job

        self.storage.files.wipe_unsealed(rel_dir)
        result_dir = self.storage.files.reserve(rel_dir)
        self._hook("collect:after-reserve")

        with tempfile.TemporaryDirectory(prefix="sweepd-collect-") as tmp:
            local_archive = Path(tmp) / f"{job.id}.tar.gz"
            try:
                transport.download_file(paths.archive, str(local_archive))
            except TransportFailure as exc:
                noted = model.append_note(job, f"collect download failed: {exc}")
                self.documents.cas_status(collection, job.id, "running", noted)
                return noted
            self._hook("collect:after-download")
            try:
                self._unpack(local_archive, job.id, result_dir)
            except CorruptArchive as exc:
                self.storage.files.wipe_unsealed(rel_dir)
                return self._fail_infra(job, rel_dir, f"corrupt archive: {exc}")
        self._hook("collect:after-unpack")

        try:
            exit_code, finished_at = self._parse_status(result_dir)
        except MalformedStatusFile as exc:
            # keep everything, including the raw status file, for post-mortem
            job = model.append_note(job, f"malformed status file: {exc}")
            return self._seal_and_finalize(job, rel_dir, paths, transport,
                                           exit_code=None, finished_at=None,
                                           infra_failure=True)
        return self._seal_and_finalize(job, rel_dir, paths, transport,
                                       exit_code=exit_code, finished_at=finished_at,
                                       infra_failure=False)

    # -- collection internals ---------------------------------------------

    def _unpack(self, local_archive: Path, job_id: str, result_dir: Path) -> None:
        tmp = Path(tempfile.mkdtemp(prefix="sweepd-unpack-"))
        try:
            try:
                with tarfile.open(local_archive, "r:gz") as tar:
                    if hasattr(tarfile, "data_filter"):
                        tar.extractall(tmp, filter="data")
                    else:
                        tar.extractall(tmp)
            except (tarfile.TarError, EOFError, OSError, ValueError) as exc:
                raise CorruptArchive(str(exc)) from exc
            inner = tmp / job_id
            if not inner.is_dir():
                raise CorruptArchive(f"archive lacks top-level directory {job_id!r}")
            for item in inner.iterdir():
                shutil.move(str(item), result_dir / item.name)
        finally:
            shutil.rmtree(tmp, ignore_errors=True)

    @staticmethod
    def _parse_status(result_dir: Path) -> tuple[int, Optional[str]]:
        status_path = result_dir / "_status.json"
        try:
            payload = json.loads(status_path.read_text())
            exit_code = int(payload["exit_code"])
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedStatusFile(str(exc)) from exc
        finished_at = payload.get("finished_at")
        return exit_code, finished_at if isinstance(finished_at, str) else None

    @staticmethod
    def _parse_time(result_dir: Path) -> Optional[float]:
        try:
            return float((result_dir / "_time.txt").read_text().strip())
        except (OSError, ValueError):
            return None

    @staticmethod
    def _parse_version(result_dir: Path) -> Optional[str]:
        try:
            text = (result_dir / "_version.txt").read_text().strip()
        except OSError:
            return None
        return text or None

    def _seal_and_finalize(self, job, rel_dir: str, paths: WorkPaths, transport,
                           exit_code: Optional[int], finished_at: Optional[str],
                           infra_failure: bool):
        collection = self._collection(job)
        result_dir = self.storage.files.abspath(rel_dir)
        elapsed = self._parse_time(result_dir)
        version = self._parse_version(result_dir)
        try:
            digest = self.storage.files.seal(rel_dir)
        except AlreadySealed:
            return self._finalize_from_dir(job, rel_dir, paths, transport)
        job = replace(job, result_digest=digest)
        self.documents.cas_status(collection, job.id, "running", job)
        self._hook("collect:after-seal")

        fields = dict(result_dir=rel_dir, result_digest=digest,
                      elapsed_seconds=elapsed, simulator_version=version)
        if infra_failure or exit_code is None:
            done = model.transition(job, "failed", exit_code=None, **fields)
        elif exit_code == 0:
            done = model.transition(job, "succeeded", exit_code=0,
                                    finished_at=finished_at, **fields)
        else:
            done = model.transition(job, "failed", exit_code=exit_code,
                                    finished_at=finished_at, **fields)
        if not self.documents.cas_status(collection, job.id, "running", done):
            return self.documents.get(collection, job.id)
        self._hook("collect:after-finalize")
        if not infra_failure:
            self._cleanup_remote(transport, paths)
        logger.info("%s %s: collected as %s (exit %s)", collection, job.id,
                    done.status, done.exit_code)
        return done

    def _fail_infra(self, job, rel_dir: str, note: str):
        """Terminal infra failure: seal an error-note directory, keep the remote."""
        collection = self._collection(job)
        host = self._host(job)
        transport = transport_for(host)
        paths = WorkPaths.for_job(host, job.id)
        self.storage.files.wipe_unsealed(rel_dir)
        result_dir = self.storage.files.reserve(rel_dir)
        (result_dir / "_error.txt").write_text(note + "\n")
        job = model.append_note(job, note)
        logger.warning("%s %s: %s", collection, job.id, note)
        return self._seal_and_finalize(job, rel_dir, paths, transport,
                                       exit_code=None, finished_at=None,
                                       infra_failure=True)

    def _finalize_from_dir(self, job, rel_dir: str, paths: WorkPaths, transport):
        """Adopt an already-sealed result directory (crash after seal)."""
        result_dir = self.storage.files.abspath(rel_dir)
        digest = self.storage.files.sealed_digest(rel_dir)
        job = replace(job, result_digest=digest)
        try:
            exit_code, finished_at = self._parse_status(result_dir)
        except MalformedStatusFile:
            exit_code, finished_at = None, None
        fields = dict(result_dir=rel_dir, result_digest=digest,
                      elapsed_seconds=self._parse_time(result_dir),
                      simulator_version=self._parse_version(result_dir))
        collection = self._collection(job)
        if exit_code == 0:
            done = model.transition(job, "succeeded", exit_code=0,
                                    finished_at=finished_at, **fields)
        else:
            done = model.transition(job, "failed", exit_code=exit_code,
                                    finished_at=finished_at, **fields)
        if not self.documents.cas_status(collection, job.id, "running", done):
            return self.documents.get(collection, job.id)
        if exit_code is not None:
            self._cleanup_remote(transport, paths)
        return done

    def _cleanup_remote(self, transport, paths: WorkPaths) -> None:
        for target in (paths.work_dir, paths.script, paths.archive, paths.claim,
                       paths.script.rsplit(".", 1)[0] + ".log"):
            try:
                transport.remove_tree(target)
            except TransportFailure as exc:
                logger.warning("cleanup failed for %s: %s", target, exc)

    # -- cancellation --------------------------------------------------------

    def cancel(self, job):
        """Cancel a created or submitted job; terminal and running jobs refuse."""
        collection = self._collection(job)
        if job.status == "submitted" and job.job_id:
            host = self._host(job)
            client = self.registry.resolve(host)
            try:
                client.delete(job.job_id)
            except SweepdError as exc:
                logger.warning("%s %s: scheduler delete failed: %s", collection, job.id, exc)
        cancelled = model.transition(job, "cancelled")
        if not self.documents.cas_status(collection, job.id, job.status, cancelled):
            return self.documents.get(collection, job.id)
        return cancelled
