"""Binding hosts to scheduler clients.

A host's ``xsub_path`` selects the backend, so swapping schedulers never
touches worker code:

    fork                      in-process fork backend, state under the data root
    fork:///some/state/dir    in-process fork backend, explicit state dir
    sim://?capacity=2&default_duration=1&auto_advance=0.5
                              in-process simulated backend
    /path/to/xsub             wrapper executable invoked over the host transport
"""
from __future__ import annotations

import json
import shlex
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from ..errors import BackendUnreachable, SubmitRejected
from ..model import Host
from ..transport import transport_for
from .base import SchedulerJobStatus, SchedulerRequest
from .fork import ForkBackend
from .simulated import SimulatedBackend


class WrapperClient:
    """Talks the xsub/xstat/xdel wire protocol over a transport."""

    def __init__(self, transport, xsub_path: str):
        self.transport = transport
        self.xsub_path = xsub_path
        base = Path(xsub_path)
        self.xstat_path = str(base.parent / "xstat") if base.parent != Path(".") else "xstat"
        self.xdel_path = str(base.parent / "xdel") if base.parent != Path(".") else "xdel"

    def submit(self, request: SchedulerRequest) -> str:
        cmd = (f"{shlex.quote(self.xsub_path)} {shlex.quote(request.script_path)} "
               f"--work-dir {shlex.quote(request.work_dir)} "
               f"--params-json {shlex.quote(json.dumps(request.parameters))}")
        rc, out, err = self.transport.run(cmd)
        if rc != 0:
            raise SubmitRejected(err.strip() or f"xsub exited {rc}")
        return self._parse(out, "job_id")

    def status(self, job_id: str) -> SchedulerJobStatus:
        rc, out, err = self.transport.run(f"{shlex.quote(self.xstat_path)} {shlex.quote(job_id)}")
        if rc != 0:
            raise BackendUnreachable(err.strip() or f"xstat exited {rc}")
        return SchedulerJobStatus(job_id, self._parse(out, "status"))

    def delete(self, job_id: str) -> None:
        rc, _, err = self.transport.run(f"{shlex.quote(self.xdel_path)} {shlex.quote(job_id)}")
        if rc != 0:
            raise BackendUnreachable(err.strip() or f"xdel exited {rc}")

    @staticmethod
    def _parse(out: str, key: str) -> str:
        for line in out.splitlines():
            line = line.strip()
            if not line.startswith("{"):
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError:
                continue
            if key in payload:
                return payload[key]
        raise BackendUnreachable(f"wrapper reply carried no {key!r}: {out!r}")


class SchedulerRegistry:
    """Resolves and caches one scheduler client per host."""

    def __init__(self, data_root: str | Path):
        self.data_root = Path(data_root)
        self._clients: dict[str, object] = {}

    def register(self, host_id: str, client) -> None:
        self._clients[host_id] = client

    def resolve(self, host: Host):
        client = self._clients.get(host.id)
        if client is None:
            client = self._build(host)
            self._clients[host.id] = client
        return client

    def _build(self, host: Host):
        spec = host.xsub_path
        if spec == "fork" or spec.startswith("fork://"):
            state = spec[len("fork://"):] if spec.startswith("fork://") else ""
            state_dir = Path(state) if state else self.data_root / "scheduler" / "fork" / host.id
            return ForkBackend(state_dir)
        if spec in ("sim", "simulated") or spec.startswith("sim://"):
            opts = {}
            if spec.startswith("sim://"):
                query = urlparse(spec).query
                opts = {k: v[0] for k, v in parse_qs(query).items()}
            capacity = int(opts["capacity"]) if "capacity" in opts else None
            return SimulatedBackend(
                capacity=capacity,
                default_duration=float(opts.get("default_duration", 1.0)),
                auto_advance=float(opts.get("auto_advance", 0.0)),
            )
        return WrapperClient(transport_for(host), spec)
