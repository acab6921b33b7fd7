#!/usr/bin/env python3
"""Regenerate the web console's differential-test fixtures.

Runs the reference sweep (p1 x p2 grid, 5 runs per point) through the
full pipeline on the fork backend, then captures:

  frontend/tests/fixtures/plot_data_anchor.json
      the /parameter_sets/{anchor}/plot_data payload for x=p1, y=y,
      anchored at the ParameterSet with p2=2.0

  frontend/tests/fixtures/cli_plot_data_p2_2.csv
      `sweepd plot-data --sim ... --x p1 --y y --filter '{"p2": 2.0}'`

The console test asserts its scatter points equal the CSV rows.
"""
import io
import json
import sys
import tempfile
import textwrap
from contextlib import redirect_stdout
from pathlib import Path

from fastapi.testclient import TestClient

from sweepd.api import create_app
from sweepd.cli import main as cli_main
from sweepd.ops import Ops
from sweepd.store import Storage
from sweepd.worker import Worker, WorkerConfig

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

STUB = textwrap.dedent("""
    import json, os, sys
    if os.path.exists("_input.json"):
        params = json.load(open("_input.json"))
        p1, p2, seed = params["p1"], params["p2"], params["_seed"]
    else:
        p1, p2, seed = float(sys.argv[1]), float(sys.argv[2]), int(sys.argv[3])
    y = p1 + p2
    open("out.csv", "w").write(f"{p1},{p2},{seed},{y}\\n")
    json.dump({"y": y}, open("_output.json", "w"))
""").lstrip()


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix="sweepd-fixtures-") as tmp:
        base = Path(tmp)
        stub = base / "stub.py"
        stub.write_text(STUB)
        storage = Storage(base / "data")
        ops = Ops(storage)
        host = ops.add_host("box", work_base_dir=str(base / "work"),
                            xsub_path="fork", max_concurrent_jobs=16)
        sim, _ = ops.add_simulator("sum_sim", f"python3 {stub}", [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        grid = {"p1": [1.0, 2.0, 3.0, 4.0, 5.0], "p2": [2.0, 4.0, 6.0, 8.0, 10.0]}
        ops.sweep(sim, grid, 5, host)

        worker = Worker(storage, WorkerConfig(poll_interval_seconds=0.05,
                                              max_dispatch_per_cycle=16))
        for _ in range(600):
            worker.cycle()
            runs = storage.documents.query("runs")
            if runs and all(r.status == "finished" for r in runs):
                break
        else:
            print("sweep did not finish", file=sys.stderr)
            return 1

        anchor = next(p for p in storage.documents.query(
            "parameter_sets", {"simulator_id": sim.id})
            if p.values == {"p1": 1.0, "p2": 2.0})
        client = TestClient(create_app(storage))
        payload = client.get(f"/parameter_sets/{anchor.id}/plot_data",
                             params={"x": "p1", "y": "y"}).json()
        (FIXTURES / "plot_data_anchor.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")

        csv_buf = io.StringIO()
        with redirect_stdout(csv_buf):
            code = cli_main(["--data-root", str(base / "data"), "plot-data",
                             "--sim", "sum_sim", "--x", "p1", "--y", "y",
                             "--reduce", "mean", "--filter", '{"p2": 2.0}'])
        assert code == 0
        (FIXTURES / "cli_plot_data_p2_2.csv").write_text(csv_buf.getvalue())
    print(f"fixtures written to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
