"""Operator command line: registration, sweeping, monitoring, export.

Talks to a local data root by default (embedded mode) or to a running
API service when a service URL is configured (--api-url or the config
file).  Exit codes: 1 usage, 2 validation, 3 remote/transport trouble.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import httpx

from . import api as api_module
from . import model
from .apiclient import ApiClient
from .errors import (
    BackendUnreachable,
    SubmitRejected,
    SweepdError,
    TransportFailure,
)
from .ops import Ops, PlotPoint
from .store import Storage
from .worker import Worker, WorkerConfig

DEFAULT_CONFIG_PATH = "~/.config/sweepd/config.json"
DEFAULT_DATA_ROOT = "./sweepd_data"

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_REMOTE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def load_config(path: str | None) -> dict:
    candidate = path or os.environ.get("SWEEPD_CONFIG") or DEFAULT_CONFIG_PATH
    p = Path(candidate).expanduser()
    if not p.exists():
        if path:
            raise SweepdError(f"config file not found: {p}")
        return {}
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SweepdError(f"bad config file {p}: {exc}") from exc


class Context:
    """Resolves embedded vs remote mode lazily per command."""

    def __init__(self, args):
        self.args = args
        config = load_config(args.config)
        self.api_url = args.api_url or config.get("service_url") or None
        if args.data_root:
            self.data_root = args.data_root
        elif config.get("data_root"):
            self.data_root = config["data_root"]
        else:
            self.data_root = DEFAULT_DATA_ROOT
        self._storage = None
        self._client = None

    @property
    def remote(self) -> bool:
        return self.api_url is not None and not self.args.data_root

    def storage(self) -> Storage:
        if self._storage is None:
            self._storage = Storage(self.data_root)
        return self._storage

    def ops(self) -> Ops:
        return Ops(self.storage())

    def client(self) -> ApiClient:
        if self._client is None:
            self._client = ApiClient(self.api_url)
        return self._client


def _json_arg(raw: str, what: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SweepdError(f"bad JSON for {what}: {exc}") from exc


# -- host -----------------------------------------------------------------

def cmd_host_add(ctx: Context):
    args = ctx.args
    fields = dict(
        address=args.address, transport=args.transport, xsub_path=args.xsub,
        work_base_dir=args.work_base or str(Path(ctx.data_root) / "work"),
        polling_interval_seconds=args.poll, max_concurrent_jobs=args.max_jobs,
        port=args.port, user=args.user, scheduler_template=args.template,
        scheduler_params=_json_arg(args.scheduler_params, "--scheduler-params"),
    )
    if ctx.remote:
        host = ctx.client().add_host(name=args.name, **fields)
        print(f"{host['id']}  {host['name']}")
    else:
        host = ctx.ops().add_host(args.name, **fields)
        print(f"{host.id}  {host.name}")
    return 0


def cmd_host_list(ctx: Context):
    if ctx.remote:
        hosts = ctx.client().list_hosts()
    else:
        hosts = [vars_of(h) for h in ctx.storage().documents.query("hosts", sort="name")]
    for h in hosts:
        print(f"{h['id']}  {h['name']}  {h['transport']}://{h['address']}  "
              f"xsub={h['xsub_path']}  max_jobs={h['max_concurrent_jobs']}")
    return 0


# -- simulator ---------------------------------------------------------------

def cmd_simulator_add(ctx: Context):
    args = ctx.args
    definitions = _json_arg(args.params_def, "--params-def")
    if not isinstance(definitions, list):
        raise SweepdError("--params-def must be a JSON list of definitions")
    if ctx.remote:
        sim = ctx.client().add_simulator(
            name=args.name, command=args.command, parameter_definitions=definitions,
            input_mode=args.input_mode, description=args.description,
            version_command=args.version_command)
        sim_id, warnings = sim["id"], sim.get("warnings", [])
    else:
        record, warnings = ctx.ops().add_simulator(
            args.name, args.command, definitions, input_mode=args.input_mode,
            description=args.description, version_command=args.version_command)
        sim_id = record.id
    print(f"{sim_id}  {args.name}")
    for note in warnings:
        print(f"note: {note}")
    return 0


def cmd_simulator_list(ctx: Context):
    if ctx.remote:
        sims = ctx.client().list_simulators()
    else:
        sims = [vars_of(s) for s in ctx.storage().documents.query("simulators", sort="name")]
    for s in sims:
        print(f"{s['id']}  {s['name']}  input={s['input_mode']}  cmd={s['command']}")
    return 0


def cmd_simulator_show(ctx: Context):
    ref = ctx.args.ref
    if ctx.remote:
        sim = ctx.client().get_simulator(ref)
    else:
        sim = vars_of(ctx.ops().get_simulator(ref))
    print(json.dumps(sim, indent=2, sort_keys=True))
    return 0


# -- parameter sets ---------------------------------------------------------------

def cmd_ps_create(ctx: Context):
    args = ctx.args
    values = _json_arg(args.params, "--params")
    if ctx.remote:
        sim = ctx.client().get_simulator(args.sim)
        ps, created = ctx.client().create_parameter_set(sim["id"], values)
        print(f"{ps['id']}  {'created' if created else 'existing'}")
    else:
        ops = ctx.ops()
        sim = ops.get_simulator(args.sim)
        ps, created = ops.find_or_create_parameter_set(sim, values)
        print(f"{ps.id}  {'created' if created else 'existing'}")
    return 0


def cmd_ps_sweep(ctx: Context):
    args = ctx.args
    grid = _json_arg(args.grid, "--grid")
    if not isinstance(grid, dict):
        raise SweepdError("--grid must be a JSON map of name -> list of values")
    if ctx.remote:
        client = ctx.client()
        sim = client.get_simulator(args.sim)
        names = sorted(grid)
        import itertools as _it
        ps_created = runs_created = points = 0
        for combo in _it.product(*(grid[n] for n in names)):
            ps, was_created = client.create_parameter_set(sim["id"], dict(zip(names, combo)))
            ps_created += int(was_created)
            _, n_created = client.runs_upto(ps["id"], args.runs, args.host)
            runs_created += n_created
            points += 1
        summary = {"points": points, "parameter_sets_created": ps_created,
                   "runs_created": runs_created}
    else:
        ops = ctx.ops()
        sim = ops.get_simulator(args.sim)
        host = ops.get_host(args.host)
        summary = ops.sweep(sim, grid, args.runs, host)
    print(f"points={summary['points']} "
          f"parameter_sets_created={summary['parameter_sets_created']} "
          f"runs_created={summary['runs_created']}")
    return 0


def cmd_ps_list(ctx: Context):
    args = ctx.args
    if ctx.remote:
        sim = ctx.client().get_simulator(args.sim)
        items = ctx.client().list_parameter_sets(sim["id"])
        for p in items:
            print(f"{p['id']}  {p['canonical_key']}")
    else:
        ops = ctx.ops()
        sim = ops.get_simulator(args.sim)
        for p in ctx.storage().documents.query("parameter_sets", {"simulator_id": sim.id},
                                               sort="canonical_key"):
            print(f"{p.id}  {p.canonical_key}")
    return 0


# -- runs ----------------------------------------------------------------------

def cmd_run_list(ctx: Context):
    args = ctx.args
    sim_id = None
    if args.sim:
        sim_id = (ctx.client().get_simulator(args.sim)["id"] if ctx.remote
                  else ctx.ops().get_simulator(args.sim).id)
    if ctx.remote:
        runs = ctx.client().list_runs(status=args.status, parameter_set_id=args.ps,
                                      simulator_id=sim_id)
    else:
        runs = [vars_of(r) for r in ctx.ops().list_runs(status=args.status,
                                                        parameter_set_id=args.ps,
                                                        simulator_id=sim_id)]
    for r in runs:
        exit_code = "" if r["exit_code"] is None else r["exit_code"]
        print(f"{r['id']}  ps={r['parameter_set_id']}  seed={r['seed']}  "
              f"{r['status']}  exit={exit_code}")
    return 0


def cmd_run_cancel(ctx: Context):
    if ctx.remote:
        run = ctx.client().cancel_run(ctx.args.run_id)
        print(f"{run['id']}  {run['status']}")
    else:
        from .executor import Executor
        from .scheduler import SchedulerRegistry
        storage = ctx.storage()
        run = storage.documents.get("runs", ctx.args.run_id)
        executor = Executor(storage, SchedulerRegistry(storage.data_root))
        run = executor.cancel(run)
        print(f"{run.id}  {run.status}")
    return 0


# -- analyzers / analyses ----------------------------------------------------------

def cmd_analyzer_add(ctx: Context):
    args = ctx.args
    definitions = _json_arg(args.params_def, "--params-def")
    if ctx.remote:
        sim = ctx.client().get_simulator(args.sim)
        analyzer = ctx.client().add_analyzer(
            simulator_id=sim["id"], name=args.name, command=args.command,
            parameter_definitions=definitions, input_mode=args.input_mode,
            scope=args.scope, description=args.description)
        print(f"{analyzer['id']}  {analyzer['name']}")
    else:
        ops = ctx.ops()
        sim = ops.get_simulator(args.sim)
        analyzer, _ = ops.add_analyzer(sim.id, args.name, args.command, definitions,
                                       input_mode=args.input_mode, scope=args.scope,
                                       description=args.description)
        print(f"{analyzer.id}  {analyzer.name}")
    return 0


def cmd_analyzer_list(ctx: Context):
    args = ctx.args
    sim_id = None
    if args.sim:
        sim_id = (ctx.client().get_simulator(args.sim)["id"] if ctx.remote
                  else ctx.ops().get_simulator(args.sim).id)
    if ctx.remote:
        items = ctx.client().list_analyzers(sim_id)
    else:
        filt = {"simulator_id": sim_id} if sim_id else None
        items = [vars_of(a) for a in ctx.storage().documents.query("analyzers", filt, sort="name")]
    for a in items:
        print(f"{a['id']}  {a['name']}  scope={a['scope']}  cmd={a['command']}")
    return 0


def cmd_analysis_create(ctx: Context):
    args = ctx.args
    parameters = _json_arg(args.params, "--params")
    if ctx.remote:
        record = ctx.client().create_analysis(args.analyzer, args.target, parameters,
                                              args.host)
        print(f"{record['id']}  {record['status']}")
    else:
        ops = ctx.ops()
        analyzer = ops.get_analyzer(args.analyzer)
        host = ops.get_host(args.host)
        record = ops.create_analysis(analyzer, args.target, parameters, host)
        print(f"{record.id}  {record.status}")
    return 0


# -- results -----------------------------------------------------------------------

def cmd_result_fetch(ctx: Context):
    args = ctx.args
    if ctx.remote:
        data = ctx.client().fetch_result(args.run_id, args.path)
    else:
        ops = ctx.ops()
        run = ctx.storage().documents.get("runs", args.run_id)
        data = ops.read_result_file(run, args.path)
    sys.stdout.buffer.write(data)
    return 0


def cmd_plot_data(ctx: Context):
    args = ctx.args
    if args.reduce != "mean":
        raise SweepdError(f"--reduce supports only 'mean' (got {args.reduce!r})")
    where = _json_arg(args.filter, "--filter") if args.filter else None
    if ctx.remote:
        sim = ctx.client().get_simulator(args.sim)
        payload = ctx.client().plot_data(sim["id"], args.x, args.y)
        points = [PlotPoint(**p) for p in payload["points"]]
        if where:
            points = [p for p in points
                      if all(p.values.get(k) == v for k, v in where.items())]
        csv_text = Ops.plot_csv(points)
    else:
        ops = ctx.ops()
        sim = ops.get_simulator(args.sim)
        points = ops.plot_points(sim, args.x, args.y, where)
        csv_text = ops.plot_csv(points)
    sys.stdout.write(csv_text)
    return 0


# -- service / worker / snapshots -----------------------------------------------------

def cmd_worker(ctx: Context):
    args = ctx.args
    config = WorkerConfig(poll_interval_seconds=args.poll_interval,
                          max_dispatch_per_cycle=args.max_dispatch,
                          shutdown_grace_seconds=args.grace)
    worker = Worker(ctx.storage(), config)
    worker.run_loop(max_cycles=args.max_cycles)
    return 0


def cmd_serve(ctx: Context):
    args = ctx.args
    api_module.serve(ctx.storage(),
                     mode="read_only" if args.read_only else "read_write",
                     host=args.bind, port=args.port, static_dir=args.static_dir,
                     import_snapshot=args.import_snapshot)
    return 0


def cmd_export(ctx: Context):
    report = ctx.ops().export_snapshot(ctx.args.archive)
    total = sum(report["documents"].values())
    print(f"exported {total} documents to {report['path']}")
    return 0


def cmd_import(ctx: Context):
    report = ctx.ops().import_snapshot(ctx.args.archive)
    print(f"imported={report['imported']} skipped={report['skipped']} "
          f"files_copied={report['files_copied']}")
    return 0


def vars_of(record) -> dict:
    from dataclasses import asdict
    return asdict(record)


# -- parser ---------------------------------------------------------------------------

def _global_flags(parser, suppress=False):
    # accepted both before and after the subcommand; SUPPRESS keeps a
    # subcommand-level default from clobbering a value parsed earlier
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default,
                        help="config file (default ~/.config/sweepd/config.json)")
    parser.add_argument("--data-root", default=default,
                        help="embedded mode: data root directory")
    parser.add_argument("--api-url", default=default,
                        help="remote mode: API service base URL")


def build_parser() -> _Parser:
    parser = _Parser(prog="sweepd", description=__doc__)
    _global_flags(parser)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    host = sub.add_parser("host", help="manage computational hosts").add_subparsers(
        dest="action", required=True)
    p = host.add_parser("add")
    p.add_argument("name")
    p.add_argument("--address", default="local")
    p.add_argument("--transport", choices=("local", "ssh"), default="local")
    p.add_argument("--xsub", default="fork",
                   help="scheduler: fork | sim | sim://?... | /path/to/xsub")
    p.add_argument("--work-base", default="")
    p.add_argument("--poll", type=int, default=5)
    p.add_argument("--max-jobs", type=int, default=4)
    p.add_argument("--port", type=int, default=22)
    p.add_argument("--user", default="")
    p.add_argument("--template", default="none", choices=("none", "torque", "slurm"))
    p.add_argument("--scheduler-params", default="{}")
    p.set_defaults(func=cmd_host_add)
    host.add_parser("list").set_defaults(func=cmd_host_list)

    sim = sub.add_parser("simulator", help="manage simulators").add_subparsers(
        dest="action", required=True)
    p = sim.add_parser("add")
    p.add_argument("name")
    p.add_argument("--command", required=True)
    p.add_argument("--params-def", default="[]",
                   help='JSON list, e.g. \'[{"name":"p1","kind":"float"}]\'')
    p.add_argument("--input-mode", choices=model.INPUT_MODES, default="arguments")
    p.add_argument("--description", default="")
    p.add_argument("--version-command", default="")
    p.set_defaults(func=cmd_simulator_add)
    sim.add_parser("list").set_defaults(func=cmd_simulator_list)
    p = sim.add_parser("show")
    p.add_argument("ref", help="simulator id or name")
    p.set_defaults(func=cmd_simulator_show)

    ps = sub.add_parser("ps", help="parameter sets").add_subparsers(dest="action", required=True)
    p = ps.add_parser("create")
    p.add_argument("--sim", required=True)
    p.add_argument("--params", required=True, help="JSON value map")
    p.set_defaults(func=cmd_ps_create)
    p = ps.add_parser("sweep")
    p.add_argument("--sim", required=True)
    p.add_argument("--grid", required=True, help="JSON map name -> list of values")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--host", required=True)
    p.set_defaults(func=cmd_ps_sweep)
    p = ps.add_parser("list")
    p.add_argument("--sim", required=True)
    p.set_defaults(func=cmd_ps_list)

    run = sub.add_parser("run", help="runs").add_subparsers(dest="action", required=True)
    p = run.add_parser("list")
    p.add_argument("--status", choices=model.STATUSES)
    p.add_argument("--ps")
    p.add_argument("--sim")
    p.set_defaults(func=cmd_run_list)
    p = run.add_parser("cancel")
    p.add_argument("run_id")
    p.set_defaults(func=cmd_run_cancel)

    analyzer = sub.add_parser("analyzer", help="manage analyzers").add_subparsers(
        dest="action", required=True)
    p = analyzer.add_parser("add")
    p.add_argument("name")
    p.add_argument("--sim", required=True)
    p.add_argument("--command", required=True)
    p.add_argument("--params-def", default="[]")
    p.add_argument("--input-mode", choices=model.INPUT_MODES, default="arguments")
    p.add_argument("--scope", choices=model.ANALYZER_SCOPES, default="on_run")
    p.add_argument("--description", default="")
    p.set_defaults(func=cmd_analyzer_add)
    p = analyzer.add_parser("list")
    p.add_argument("--sim")
    p.set_defaults(func=cmd_analyzer_list)

    analysis = sub.add_parser("analysis", help="analyses").add_subparsers(
        dest="action", required=True)
    p = analysis.add_parser("create")
    p.add_argument("--analyzer", required=True)
    p.add_argument("--target", required=True, help="run id or parameter-set id")
    p.add_argument("--params", default="{}")
    p.add_argument("--host", required=True)
    p.set_defaults(func=cmd_analysis_create)

    result = sub.add_parser("result", help="result files").add_subparsers(
        dest="action", required=True)
    p = result.add_parser("fetch")
    p.add_argument("run_id")
    p.add_argument("path")
    p.set_defaults(func=cmd_result_fetch)

    p = sub.add_parser("plot-data", help="aggregated output-vs-parameter CSV")
    p.add_argument("--sim", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--reduce", default="mean")
    p.add_argument("--filter", help="JSON map of parameter -> value to match")
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("worker", help="run the worker daemon")
    _global_flags(p, suppress=True)
    p.add_argument("--poll-interval", type=float, default=5.0)
    p.add_argument("--max-dispatch", type=int, default=10)
    p.add_argument("--grace", type=float, default=30.0)
    p.add_argument("--max-cycles", type=int, default=None)
    p.set_defaults(func=cmd_worker)

    p = sub.add_parser("serve", help="run the API service")
    _global_flags(p, suppress=True)
    p.add_argument("--read-only", action="store_true")
    p.add_argument("--port", type=int, default=3000)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--static-dir", help="serve the web console from this directory at /ui")
    p.add_argument("--import-snapshot", help="merge this snapshot archive before serving")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="export documents + files to a tar.gz snapshot")
    p.add_argument("archive")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="merge a snapshot archive into this store")
    p.add_argument("archive")
    p.set_defaults(func=cmd_import)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr)
    try:
        ctx = Context(args)
        return args.func(ctx)
    except (TransportFailure, SubmitRejected, BackendUnreachable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except SweepdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REMOTE


if __name__ == "__main__":
    sys.exit(main())
