import textwrap
import time

import pytest

from sweepd.ops import Ops
from sweepd.store import Storage
from sweepd.worker import Worker, WorkerConfig

# Stub simulator used across the suite: deterministic y = p1 + p2,
# reads either command-line arguments or _input.json.
STUB_SUM = """
import json, os, sys
if os.path.exists("_input.json"):
    params = json.load(open("_input.json"))
    p1, p2, seed = params["p1"], params["p2"], params["_seed"]
else:
    p1, p2, seed = float(sys.argv[1]), float(sys.argv[2]), int(sys.argv[3])
y = p1 + p2
with open("out.csv", "w") as fh:
    fh.write(f"{p1},{p2},{seed},{y}\\n")
with open("_output.json", "w") as fh:
    json.dump({"y": y}, fh)
"""

# exit code comes from the first argument; the seed lands after it
STUB_EXIT_CODE = """
import sys
with open("attempt.txt", "w") as fh:
    fh.write("ran\\n")
sys.exit(int(sys.argv[1]))
"""

STUB_NONCE = """
import sys, uuid
with open("_nonce.txt", "a") as fh:
    fh.write(uuid.uuid4().hex + "\\n")
"""


@pytest.fixture
def storage(tmp_path):
    return Storage(tmp_path / "data")


@pytest.fixture
def ops(storage):
    return Ops(storage)


@pytest.fixture
def work_base(tmp_path):
    base = tmp_path / "work"
    base.mkdir()
    return base


@pytest.fixture
def local_host(ops, work_base):
    return ops.add_host("local", address="local", transport="local",
                        xsub_path="fork", work_base_dir=str(work_base),
                        max_concurrent_jobs=8)


def write_stub(tmp_path, name: str, body: str) -> str:
    path = tmp_path / name
    path.write_text(textwrap.dedent(body).lstrip())
    return f"python3 {path}"


@pytest.fixture
def sum_simulator(ops, tmp_path):
    command = write_stub(tmp_path, "stub_sum.py", STUB_SUM)
    sim, _ = ops.add_simulator("sum_sim", command, [
        {"name": "p1", "kind": "float"},
        {"name": "p2", "kind": "float"},
    ])
    return sim


def drive(storage, max_cycles: int = 400, poll: float = 0.03,
          worker: Worker | None = None, max_dispatch: int = 16) -> int:
    """Cycle a worker until every run and analysis is terminal.

    Returns the number of cycles used; fails the test on timeout.
    """
    worker = worker or Worker(storage, WorkerConfig(poll_interval_seconds=poll,
                                                    max_dispatch_per_cycle=max_dispatch))
    for cycle in range(1, max_cycles + 1):
        worker.cycle()
        jobs = storage.documents.query("runs") + storage.documents.query("analyses")
        if jobs and all(j.status in ("finished", "failed", "cancelled") for j in jobs):
            return cycle
        time.sleep(poll)
    states = [(j.id, j.status) for j in storage.documents.query("runs")]
    pytest.fail(f"jobs did not settle within {max_cycles} cycles: {states}")
