"""HTTP API over the operation layer.

All model operations and queries are exposed as JSON endpoints; the web
console and the CLI's remote mode are clients.  In read-only mode every
mutating verb is rejected with 403 before reaching a handler, while
reads behave exactly as in read-write mode.
"""
from __future__ import annotations

import logging
from dataclasses import asdict
from typing import Any, Optional

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import model
from .errors import (
    DuplicateKey,
    IllegalTransition,
    NotFound,
    ScopeMismatch,
    SweepdError,
    TargetNotReady,
    UnknownHost,
    ValidationError,
)
from .executor import Executor
from .ops import Ops
from .scheduler import SchedulerRegistry
from .store import Storage

logger = logging.getLogger(__name__)

MUTATING_METHODS = {"POST", "PUT", "PATCH", "DELETE"}

_ERROR_STATUS = [
    (NotFound, 404, "not_found"),
    (UnknownHost, 404, "unknown_host"),
    (DuplicateKey, 409, "duplicate"),
    (IllegalTransition, 409, "illegal_transition"),
    (TargetNotReady, 409, "target_not_ready"),
    (ScopeMismatch, 422, "scope_mismatch"),
    (ValidationError, 422, "validation"),
]


def _doc(record) -> dict:
    return asdict(record)


def _page(offset: int, limit: int) -> tuple[int, int]:
    return (max(offset, 0), max(min(limit, 1000), 1))


def create_app(storage: Storage, mode: str = "read_write",
               registry: SchedulerRegistry | None = None) -> FastAPI:
    if mode not in ("read_write", "read_only"):
        raise ValidationError(f"unknown service mode {mode!r}")
    ops = Ops(storage)
    registry = registry or SchedulerRegistry(storage.data_root)
    executor = Executor(storage, registry)
    app = FastAPI(title="sweepd", version="0.1.0", openapi_url="/openapi.json")
    app.state.mode = mode
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.middleware("http")
    async def enforce_read_only(request: Request, call_next):
        if app.state.mode == "read_only" and request.method in MUTATING_METHODS:
            return JSONResponse({"error": "read-only mode"}, status_code=403)
        return await call_next(request)

    @app.exception_handler(SweepdError)
    async def handle_domain_error(request: Request, exc: SweepdError):
        for klass, status, code in _ERROR_STATUS:
            if isinstance(exc, klass):
                return JSONResponse({"error": code, "message": str(exc)},
                                    status_code=status)
        return JSONResponse({"error": "internal", "message": str(exc)}, status_code=500)

    # -- service description ------------------------------------------------

    @app.get("/spec")
    def service_spec():
        return {"mode": app.state.mode, "service": "sweepd",
                "version": "0.1.0", "openapi": app.openapi()}

    # -- hosts ---------------------------------------------------------------

    @app.get("/hosts")
    def list_hosts():
        return {"items": [_doc(h) for h in storage.documents.query("hosts", sort="name")]}

    @app.post("/hosts", status_code=201)
    def add_host(body: dict = Body(...)):
        known = {"name", "address", "port", "user", "transport", "xsub_path",
                 "work_base_dir", "polling_interval_seconds", "max_concurrent_jobs",
                 "scheduler_template", "scheduler_params"}
        unknown = set(body) - known
        if unknown:
            raise ValidationError(f"unknown host fields: {sorted(unknown)}")
        if "name" not in body:
            raise ValidationError("host name is required")
        host = ops.add_host(**body)
        return _doc(host)

    @app.get("/hosts/{host_id}")
    def get_host(host_id: str):
        return _doc(storage.documents.get("hosts", host_id))

    # -- simulators ------------------------------------------------------------

    @app.get("/simulators")
    def list_simulators():
        return {"items": [_doc(s) for s in storage.documents.query("simulators", sort="name")]}

    @app.post("/simulators", status_code=201)
    def add_simulator(body: dict = Body(...)):
        for field in ("name", "command"):
            if field not in body:
                raise ValidationError(f"simulator {field} is required")
        sim, warnings = ops.add_simulator(
            name=body["name"], command=body["command"],
            definitions=body.get("parameter_definitions", []),
            input_mode=body.get("input_mode", "arguments"),
            description=body.get("description", ""),
            version_command=body.get("version_command", ""))
        out = _doc(sim)
        out["warnings"] = warnings
        return out

    @app.get("/simulators/{sim_id}")
    def get_simulator(sim_id: str):
        return _doc(ops.get_simulator(sim_id))

    # -- parameter sets -----------------------------------------------------------

    def _ps_with_counts(ps) -> dict:
        out = _doc(ps)
        out["run_counts"] = ops.run_status_counts(ps.id)
        return out

    @app.get("/simulators/{sim_id}/parameter_sets")
    def list_parameter_sets(sim_id: str, offset: int = 0, limit: int = 1000):
        sim = ops.get_simulator(sim_id)
        items = storage.documents.query("parameter_sets", {"simulator_id": sim.id},
                                        sort="canonical_key", page=_page(offset, limit))
        total = storage.documents.count("parameter_sets", {"simulator_id": sim.id})
        return {"items": [_ps_with_counts(p) for p in items], "total": total}

    @app.post("/simulators/{sim_id}/parameter_sets")
    def create_parameter_set(sim_id: str, response: Response, body: dict = Body(...)):
        sim = ops.get_simulator(sim_id)
        # body is either the raw value map or wrapped as {"values": {...}}
        if set(body) == {"values"} and isinstance(body["values"], dict):
            values = body["values"]
        else:
            values = body
        ps, created = ops.find_or_create_parameter_set(sim, values)
        response.status_code = 201 if created else 200
        return {"parameter_set": _doc(ps), "created": created}

    @app.get("/parameter_sets/{ps_id}")
    def get_parameter_set(ps_id: str):
        return _ps_with_counts(storage.documents.get("parameter_sets", ps_id))

    @app.get("/parameter_sets/{ps_id}/runs")
    def list_ps_runs(ps_id: str):
        storage.documents.get("parameter_sets", ps_id)
        runs = storage.documents.query("runs", {"parameter_set_id": ps_id}, sort="created_at")
        runs.sort(key=lambda r: r.seed)
        return {"items": [_doc(r) for r in runs]}

    @app.post("/parameter_sets/{ps_id}/runs_upto")
    def runs_upto(ps_id: str, body: dict = Body(...)):
        ps = storage.documents.get("parameter_sets", ps_id)
        target = body.get("target")
        if not isinstance(target, int) or target < 1:
            raise ValidationError("target must be a positive integer")
        if "host" not in body:
            raise ValidationError("host is required")
        host = ops.get_host(str(body["host"]))
        runs, created = ops.find_or_create_runs_upto(ps, target, host)
        return {"items": [_doc(r) for r in runs], "created": created}

    @app.get("/parameter_sets/{ps_id}/plot_data")
    def ps_plot_data(ps_id: str, x: str = Query(...), y: str = Query(...)):
        ps = storage.documents.get("parameter_sets", ps_id)
        points = ops.plot_points_anchor(ps, x, y)
        return {"x": x, "y": y, "anchor": ps_id,
                "points": [asdict(p) for p in points]}

    # -- runs -------------------------------------------------------------------

    @app.get("/runs")
    def list_runs(status: Optional[str] = None, parameter_set_id: Optional[str] = None,
                  simulator_id: Optional[str] = None, offset: int = 0, limit: int = 1000):
        runs = ops.list_runs(status=status, parameter_set_id=parameter_set_id,
                             simulator_id=simulator_id, page=_page(offset, limit))
        return {"items": [_doc(r) for r in runs]}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return _doc(storage.documents.get("runs", run_id))

    @app.post("/runs/{run_id}/cancel")
    def cancel_run(run_id: str):
        run = storage.documents.get("runs", run_id)
        return _doc(executor.cancel(run))

    @app.get("/runs/{run_id}/files")
    def run_files(run_id: str):
        run = storage.documents.get("runs", run_id)
        return {"items": ops.result_files(run)}

    @app.get("/runs/{run_id}/file")
    def run_file(run_id: str, path: str = Query(...)):
        run = storage.documents.get("runs", run_id)
        data = ops.read_result_file(run, path)
        return Response(content=data, media_type="application/octet-stream")

    # -- simulator-wide plot data ---------------------------------------------------

    @app.get("/simulators/{sim_id}/plot_data")
    def sim_plot_data(sim_id: str, x: str = Query(...), y: str = Query(...)):
        sim = ops.get_simulator(sim_id)
        points = ops.plot_points(sim, x, y)
        return {"x": x, "y": y, "points": [asdict(p) for p in points]}

    # -- analyzers and analyses --------------------------------------------------

    @app.get("/analyzers")
    def list_analyzers(simulator_id: Optional[str] = None):
        filt = {"simulator_id": simulator_id} if simulator_id else None
        return {"items": [_doc(a) for a in storage.documents.query("analyzers", filt, sort="name")]}

    @app.post("/analyzers", status_code=201)
    def add_analyzer(body: dict = Body(...)):
        for field in ("simulator_id", "name", "command"):
            if field not in body:
                raise ValidationError(f"analyzer {field} is required")
        analyzer, warnings = ops.add_analyzer(
            simulator_id=body["simulator_id"], name=body["name"], command=body["command"],
            definitions=body.get("parameter_definitions", []),
            input_mode=body.get("input_mode", "arguments"),
            scope=body.get("scope", "on_run"),
            description=body.get("description", ""),
            version_command=body.get("version_command", ""))
        out = _doc(analyzer)
        out["warnings"] = warnings
        return out

    @app.get("/analyzers/{analyzer_id}")
    def get_analyzer(analyzer_id: str):
        return _doc(storage.documents.get("analyzers", analyzer_id))

    @app.get("/analyses")
    def list_analyses(status: Optional[str] = None, analyzer_id: Optional[str] = None,
                      target_id: Optional[str] = None):
        filt: dict[str, Any] = {}
        if status:
            filt["status"] = status
        if analyzer_id:
            filt["analyzer_id"] = analyzer_id
        if target_id:
            filt["target_id"] = target_id
        return {"items": [_doc(a) for a in storage.documents.query("analyses", filt or None)]}

    @app.post("/analyses", status_code=201)
    def create_analysis(body: dict = Body(...)):
        for field in ("analyzer_id", "target_id", "host"):
            if field not in body:
                raise ValidationError(f"analysis {field} is required")
        analyzer = ops.get_analyzer(str(body["analyzer_id"]))
        host = ops.get_host(str(body["host"]))
        analysis = ops.create_analysis(analyzer, str(body["target_id"]),
                                       body.get("parameters", {}), host)
        return _doc(analysis)

    @app.get("/analyses/{analysis_id}")
    def get_analysis(analysis_id: str):
        return _doc(storage.documents.get("analyses", analysis_id))

    @app.get("/analyses/{analysis_id}/files")
    def analysis_files(analysis_id: str):
        record = storage.documents.get("analyses", analysis_id)
        return {"items": ops.result_files(record)}

    @app.get("/analyses/{analysis_id}/file")
    def analysis_file(analysis_id: str, path: str = Query(...)):
        record = storage.documents.get("analyses", analysis_id)
        data = ops.read_result_file(record, path)
        return Response(content=data, media_type="application/octet-stream")

    return app


def serve(storage: Storage, mode: str = "read_write", host: str = "127.0.0.1",
          port: int = 3000, static_dir: str | None = None,
          import_snapshot: str | None = None) -> None:
    """Run the service; snapshot import happens before binding, off the HTTP surface."""
    import uvicorn

    if import_snapshot:
        report = storage.import_snapshot(import_snapshot)
        logger.info("snapshot import: %s", report)
    app = create_app(storage, mode=mode)
    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="info")
