"""Operation layer shared by the API service and the CLI.

Any state reachable through the CLI is reachable through the API with
identical resulting documents because both sit on these functions.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Optional

from . import analysis as analysis_engine
from . import model
from .errors import DuplicateKey, NotFound, UnknownHost, ValidationError
from .model import Analyzer, Host, ParameterSet, Run, Simulator
from .store import Storage

logger = logging.getLogger(__name__)


@dataclass
class PlotPoint:
    parameter_set_id: str
    x: Any
    y_mean: Optional[float]
    y_stderr: Optional[float]
    n: int
    excluded: int
    values: dict[str, Any]


class Ops:
    def __init__(self, storage: Storage):
        self.storage = storage
        self.docs = storage.documents

    # -- registration -------------------------------------------------------

    def add_host(self, name: str, **kwargs) -> Host:
        host = Host(id=model.new_id(), name=name, **kwargs)
        self.docs.put(host)
        return host

    def add_simulator(self, name: str, command: str,
                      definitions: list[dict] | list[model.ParameterDefinition],
                      input_mode: str = "arguments", description: str = "",
                      version_command: str = "") -> tuple[Simulator, list[str]]:
        """Register a simulator; returns it plus registration-time warnings."""
        defs = tuple(self._coerce_definitions(definitions))
        sim = Simulator(id=model.new_id(), name=name, command=command,
                        parameter_definitions=defs, input_mode=input_mode,
                        description=description, version_command=version_command)
        self.docs.put(sim)
        return sim, [model.RESERVED_FILES_NOTICE]

    def add_analyzer(self, simulator_id: str, name: str, command: str,
                     definitions: list[dict] | list[model.ParameterDefinition] = (),
                     input_mode: str = "arguments", scope: str = "on_run",
                     description: str = "", version_command: str = "") -> tuple[Analyzer, list[str]]:
        self.docs.get("simulators", simulator_id)
        defs = tuple(self._coerce_definitions(definitions))
        analyzer = Analyzer(id=model.new_id(), simulator_id=simulator_id, name=name,
                            command=command, parameter_definitions=defs,
                            input_mode=input_mode, scope=scope, description=description,
                            version_command=version_command)
        self.docs.put(analyzer)
        return analyzer, [model.RESERVED_FILES_NOTICE]

    @staticmethod
    def _coerce_definitions(definitions):
        out = []
        for i, d in enumerate(definitions):
            if isinstance(d, model.ParameterDefinition):
                out.append(replace(d, position=i))
            else:
                d = dict(d)
                d.setdefault("position", i)
                d["position"] = i
                out.append(model.ParameterDefinition(**d))
        return out

    def get_simulator(self, ref: str) -> Simulator:
        """Resolve a simulator by id or by name."""
        try:
            return self.docs.get("simulators", ref)
        except NotFound:
            found = self.docs.query("simulators", {"name": ref})
            if not found:
                raise NotFound(f"simulators/{ref}") from None
            return found[0]

    def get_host(self, ref: str) -> Host:
        try:
            return self.docs.get("hosts", ref)
        except NotFound:
            found = self.docs.query("hosts", {"name": ref})
            if not found:
                raise UnknownHost(ref) from None
            return found[0]

    def get_analyzer(self, ref: str, simulator_id: str | None = None) -> Analyzer:
        try:
            return self.docs.get("analyzers", ref)
        except NotFound:
            filt = {"name": ref}
            if simulator_id:
                filt["simulator_id"] = simulator_id
            found = self.docs.query("analyzers", filt)
            if not found:
                raise NotFound(f"analyzers/{ref}") from None
            return found[0]

    # -- the two sweep primitives --------------------------------------------

    def find_or_create_parameter_set(self, simulator: Simulator,
                                     values: dict) -> tuple[ParameterSet, bool]:
        complete, key = model.canonicalize(simulator.parameter_definitions, values)
        existing = self.docs.query("parameter_sets",
                                   {"simulator_id": simulator.id, "canonical_key": key})
        if existing:
            return existing[0], False
        ps = ParameterSet(id=model.new_id(), simulator_id=simulator.id,
                          values=complete, canonical_key=key)
        try:
            self.docs.put(ps)
        except DuplicateKey:
            # lost a creation race; the winner's document is authoritative
            return self.docs.query("parameter_sets",
                                   {"simulator_id": simulator.id, "canonical_key": key})[0], False
        return ps, True

    def find_or_create_runs_upto(self, parameter_set: ParameterSet, target_count: int,
                                 host: Host) -> tuple[list[Run], int]:
        """Top sibling runs up to ``target_count``; returns (all runs, created)."""
        if target_count < 1:
            raise ValidationError("target run count must be positive")
        try:
            self.docs.get("hosts", host.id)
        except NotFound:
            raise UnknownHost(host.id) from None
        created = 0
        while True:
            siblings = self.docs.query("runs", {"parameter_set_id": parameter_set.id})
            if len(siblings) >= target_count:
                break
            seed = model.next_seed(r.seed for r in siblings)
            run = Run(id=model.new_id(), parameter_set_id=parameter_set.id,
                      seed=seed, host_id=host.id)
            try:
                self.docs.put(run)
                created += 1
            except DuplicateKey:
                continue  # seed raced; recompute
        siblings = self.docs.query("runs", {"parameter_set_id": parameter_set.id})
        siblings.sort(key=lambda r: r.seed)
        return siblings, created

    def sweep(self, simulator: Simulator, grid: dict[str, list], runs: int,
              host: Host) -> dict:
        """Cartesian product sweep: find-or-create each point, runs up to N each."""
        if not grid:
            raise ValidationError("sweep grid must name at least one parameter")
        for name, choices in grid.items():
            if not isinstance(choices, list) or not choices:
                raise ValidationError(f"grid entry {name!r} must be a non-empty list")
        names = sorted(grid)
        ps_created = 0
        run_created = 0
        points = 0
        for combo in itertools.product(*(grid[n] for n in names)):
            values = dict(zip(names, combo))
            ps, was_created = self.find_or_create_parameter_set(simulator, values)
            ps_created += int(was_created)
            _, n_created = self.find_or_create_runs_upto(ps, runs, host)
            run_created += n_created
            points += 1
        return {"points": points, "parameter_sets_created": ps_created,
                "runs_created": run_created}

    # -- queries and actions ---------------------------------------------------

    def list_runs(self, status: str | None = None, parameter_set_id: str | None = None,
                  simulator_id: str | None = None, page: tuple[int, int] | None = None) -> list[Run]:
        filt: dict[str, Any] = {}
        if status:
            filt["status"] = status
        if parameter_set_id:
            filt["parameter_set_id"] = parameter_set_id
        runs = self.docs.query("runs", filt or None, page=None)
        if simulator_id:
            ps_ids = {p.id for p in self.docs.query("parameter_sets",
                                                    {"simulator_id": simulator_id})}
            runs = [r for r in runs if r.parameter_set_id in ps_ids]
        if page is not None:
            offset, limit = page
            runs = runs[offset:offset + limit]
        return runs

    def run_status_counts(self, parameter_set_id: str) -> dict[str, int]:
        counts = {s: 0 for s in model.STATUSES}
        for run in self.docs.query("runs", {"parameter_set_id": parameter_set_id}):
            counts[run.status] += 1
        return counts

    def create_analysis(self, analyzer: Analyzer, target_id: str, parameters: dict,
                        host: Host):
        return analysis_engine.create_analysis(self.storage, analyzer, target_id,
                                               parameters, host)

    def result_files(self, run_or_analysis) -> list[str]:
        if not run_or_analysis.result_dir:
            return []
        return self.storage.files.list_files(run_or_analysis.result_dir)

    def read_result_file(self, run_or_analysis, rel_path: str) -> bytes:
        if not run_or_analysis.result_dir:
            raise NotFound("no result directory")
        base = self.storage.files.abspath(run_or_analysis.result_dir).resolve()
        target = (base / rel_path).resolve()
        if not str(target).startswith(str(base)) or not target.is_file():
            raise NotFound(rel_path)
        return target.read_bytes()

    # -- plot data ---------------------------------------------------------------

    def _read_output(self, run: Run) -> Optional[dict]:
        if not run.result_dir:
            return None
        path = self.storage.files.abspath(run.result_dir) / "_output.json"
        try:
            payload = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            return None
        return payload if isinstance(payload, dict) else None

    def _aggregate(self, ps: ParameterSet, x: str, y: str) -> PlotPoint:
        """Mean and standard error of ``y`` over the finished runs of one point."""
        runs = self.docs.query("runs", {"parameter_set_id": ps.id, "status": "finished"})
        samples: list[float] = []
        excluded = 0
        for run in runs:
            output = self._read_output(run)
            value = output.get(y) if output else None
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                excluded += 1
                continue
            samples.append(float(value))
        n = len(samples)
        if n == 0:
            return PlotPoint(ps.id, ps.values.get(x), None, None, 0, excluded, ps.values)
        mean = sum(samples) / n
        if n > 1:
            var = sum((s - mean) ** 2 for s in samples) / (n - 1)
            stderr = math.sqrt(var) / math.sqrt(n)
        else:
            stderr = 0.0
        return PlotPoint(ps.id, ps.values.get(x), mean, stderr, n, excluded, ps.values)

    def plot_points(self, simulator: Simulator, x: str, y: str,
                    where: dict | None = None) -> list[PlotPoint]:
        """One aggregated point per ParameterSet of the simulator.

        ``where`` restricts to ParameterSets whose values match every
        given (name, value) pair exactly.
        """
        if x not in {d.name for d in simulator.parameter_definitions}:
            raise ValidationError(f"unknown x parameter {x!r}")
        points = []
        for ps in self.docs.query("parameter_sets", {"simulator_id": simulator.id}):
            if where and any(ps.values.get(k) != v for k, v in where.items()):
                continue
            points.append(self._aggregate(ps, x, y))
        points.sort(key=lambda p: (_sort_token(p.x), p.parameter_set_id))
        return points

    def plot_points_anchor(self, anchor: ParameterSet, x: str, y: str) -> list[PlotPoint]:
        """Points for every sibling that differs from the anchor only in ``x``."""
        simulator = self.docs.get("simulators", anchor.simulator_id)
        if x not in {d.name for d in simulator.parameter_definitions}:
            raise ValidationError(f"unknown x parameter {x!r}")
        where = {k: v for k, v in anchor.values.items() if k != x}
        return self.plot_points(simulator, x, y, where)

    @staticmethod
    def plot_csv(points: list[PlotPoint]) -> str:
        lines = ["x,y_mean,y_stderr,n,excluded"]
        for p in points:
            x = model.render_value(p.x) if not isinstance(p.x, str) else p.x
            mean = "" if p.y_mean is None else model.render_value(p.y_mean)
            stderr = "" if p.y_stderr is None else model.render_value(p.y_stderr)
            lines.append(f"{x},{mean},{stderr},{p.n},{p.excluded}")
        return "\n".join(lines) + "\n"

    # -- snapshots ------------------------------------------------------------------

    def export_snapshot(self, archive_path: str) -> dict:
        return self.storage.export_snapshot(archive_path)

    def import_snapshot(self, archive_path: str) -> dict:
        return self.storage.import_snapshot(archive_path)


def _sort_token(value) -> tuple:
    if isinstance(value, bool):
        return (2, str(value))
    if isinstance(value, (int, float)):
        return (0, value)
    return (1, str(value))
