import json
import time
from pathlib import Path

import pytest

from sweepd import model
from sweepd.errors import NotFound
from sweepd.executor import (
    Executor,
    WorkPaths,
    generate_job_script,
    input_file_payload,
    render_command,
    stage_input,
)
from sweepd.model import Host, ParameterSet, Run, Simulator
from sweepd.scheduler import SchedulerRegistry
from sweepd.transport import LocalTransport

from conftest import STUB_EXIT_CODE, STUB_SUM, write_stub
from helpers import independent_tree_digest


def make_sim(command="~/sim.out", input_mode="arguments", names=("p1", "p2"),
             kind="float", version_command=""):
    return Simulator(
        id="sim1", name="sim", command=command, input_mode=input_mode,
        version_command=version_command,
        parameter_definitions=tuple(
            model.ParameterDefinition(name=n, kind=kind, position=i)
            for i, n in enumerate(names)))


def make_ps(values, sim_id="sim1"):
    _, key = model.canonicalize(
        [model.ParameterDefinition(name=n, kind="float", position=i)
         for i, n in enumerate(values)], values)
    return ParameterSet(id="ps1", simulator_id=sim_id, values=values, canonical_key=key)


class TestRenderCommand:
    def test_arguments_mode_definition_order_seed_last(self):
        sim = make_sim()
        ps = make_ps({"p1": 1.0, "p2": 2.0})
        run = Run(id="r1", parameter_set_id="ps1", seed=0, host_id="h1")
        assert render_command(sim, ps, run) == "~/sim.out 1.0 2.0 0"

    def test_json_mode_command_alone(self):
        sim = make_sim(input_mode="json_file")
        ps = make_ps({"p1": 1.0, "p2": 2.0})
        run = Run(id="r1", parameter_set_id="ps1", seed=3, host_id="h1")
        assert render_command(sim, ps, run) == "~/sim.out"

    def test_string_with_space_is_quoted(self):
        sim = Simulator(id="s", name="s", command="run.sh", parameter_definitions=(
            model.ParameterDefinition(name="label", kind="string", position=0),))
        ps = ParameterSet(id="ps1", simulator_id="s",
                          values={"label": "two words"}, canonical_key="x")
        run = Run(id="r1", parameter_set_id="ps1", seed=1, host_id="h1")
        assert render_command(sim, ps, run) == "run.sh 'two words' 1"

    def test_position_order_not_name_order(self):
        sim = Simulator(id="s", name="s", command="run.sh", parameter_definitions=(
            model.ParameterDefinition(name="zeta", kind="integer", position=0),
            model.ParameterDefinition(name="alpha", kind="integer", position=1)))
        ps = ParameterSet(id="ps1", simulator_id="s",
                          values={"alpha": 2, "zeta": 1}, canonical_key="x")
        run = Run(id="r1", parameter_set_id="ps1", seed=9, host_id="h1")
        assert render_command(sim, ps, run) == "run.sh 1 2 9"


class TestStageInput:
    def test_json_file_payload(self, tmp_path):
        sim = make_sim(input_mode="json_file")
        ps = make_ps({"p1": 0.2, "p2": 0.5})
        run = Run(id="r1", parameter_set_id="ps1", seed=3, host_id="h1")
        assert input_file_payload(sim, ps, run) == '{"p1":0.2,"p2":0.5,"_seed":3}\n'
        stage_input(LocalTransport(), sim, ps, run, str(tmp_path))
        written = json.loads((tmp_path / "_input.json").read_text())
        assert written == {"p1": 0.2, "p2": 0.5, "_seed": 3}

    def test_arguments_mode_writes_nothing(self, tmp_path):
        sim = make_sim()
        ps = make_ps({"p1": 0.2, "p2": 0.5})
        run = Run(id="r1", parameter_set_id="ps1", seed=3, host_id="h1")
        stage_input(LocalTransport(), sim, ps, run, str(tmp_path))
        assert not (tmp_path / "_input.json").exists()


class TestJobScript:
    def _host(self, template="none"):
        return Host(id="h1", name="local", work_base_dir="/scratch/jobs",
                    scheduler_template=template,
                    scheduler_params={"walltime": "1:00:00"} if template != "none" else {})

    def test_deterministic_bytes(self):
        a = generate_job_script("run.sh 1 2 0", "job-1", self._host())
        b = generate_job_script("run.sh 1 2 0", "job-1", self._host())
        assert a.text == b.text
        assert a.archive_name == "job-1.tar.gz"
        assert set(a.reserved_outputs) == {"_status.json", "_time.txt", "_version.txt"}

    def test_script_shape(self):
        script = generate_job_script("run.sh 1 2 0", "job-1", self._host(),
                                     version_command="run.sh --version")
        text = script.text
        assert text.startswith("#!/bin/bash\n")
        assert "cd /scratch/jobs/job-1" in text
        assert "run.sh 1 2 0" in text
        assert "_time.txt" in text and "_status.json" in text and "_version.txt" in text
        assert "( run.sh --version ) > _version.txt" in text
        assert "tar -czf" in text
        assert "--exclude=job-1/_input.json" in text
        assert "--exclude=job-1/_input" in text
        assert text.index("run.sh 1 2 0") < text.index("_status.json")

    def test_simulated_host_has_no_directives(self):
        script = generate_job_script("x", "j", self._host("none"))
        assert not any(line.startswith("#") and line != "#!/bin/bash"
                       for line in script.text.splitlines())

    def test_slurm_directives_prepended(self):
        script = generate_job_script("x", "j", self._host("slurm"))
        lines = script.text.splitlines()
        assert lines[1].startswith("#SBATCH --time=1:00:00")


@pytest.fixture
def pipeline(storage, ops, tmp_path, work_base):
    host = ops.add_host("local", work_base_dir=str(work_base), xsub_path="fork",
                        max_concurrent_jobs=8)
    registry = SchedulerRegistry(storage.data_root)
    executor = Executor(storage, registry)
    return storage, ops, host, executor


def wait_finished(executor, job, timeout=10.0):
    client = executor.registry.resolve(executor.documents.get("hosts", job.host_id))
    deadline = time.time() + timeout
    while time.time() < deadline:
        if client.status(job.job_id).state == "finished":
            return
        time.sleep(0.03)
    raise AssertionError("scheduler job did not finish in time")


def run_pipeline(executor, ops, sim, values, host, seed_count=1):
    ps, _ = ops.find_or_create_parameter_set(sim, values)
    runs, _ = ops.find_or_create_runs_upto(ps, seed_count, host)
    done = []
    for run in runs:
        run = executor.dispatch(run)
        assert run.status == "submitted", run
        wait_finished(executor, run)
        done.append(executor.collect(run))
    return ps, done


class TestDispatchCollect:
    def test_happy_path_local_fork(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        ps, (run,) = run_pipeline(executor, ops, sim, {"p1": 1.0, "p2": 2.0}, host)
        assert run.status == "finished"
        assert run.exit_code == 0
        assert run.elapsed_seconds is not None
        assert run.result_dir
        files = storage.files.list_files(run.result_dir)
        assert files == ["_output.json", "_status.json", "_time.txt", "_version.txt", "out.csv"]
        out = storage.files.abspath(run.result_dir) / "out.csv"
        assert out.read_text() == "1.0,2.0,0,3.0\n"
        assert storage.files.is_sealed(run.result_dir)
        assert run.result_digest == independent_tree_digest(storage.files.abspath(run.result_dir))

    def test_work_dir_removed_after_collect(self, pipeline, tmp_path, work_base):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        _, (run,) = run_pipeline(executor, ops, sim, {"p1": 1.0, "p2": 2.0}, host)
        assert run.status == "finished"
        left = [p.name for p in Path(work_base).iterdir()]
        assert left == []

    def test_nonzero_exit_failed_with_outputs_retained(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub_exit.py", STUB_EXIT_CODE)
        sim, _ = ops.add_simulator("failer", command + " 7", [])
        ps, (run,) = run_pipeline(executor, ops, sim, {}, host)
        assert run.status == "failed"
        assert run.exit_code == 7
        files = storage.files.list_files(run.result_dir)
        assert "attempt.txt" in files
        status = json.loads((storage.files.abspath(run.result_dir) / "_status.json").read_text())
        assert status["exit_code"] == 7

    def test_version_command_recorded(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}],
            version_command="echo v2.3")
        _, (run,) = run_pipeline(executor, ops, sim, {"p1": 1.0, "p2": 2.0}, host)
        assert run.simulator_version == "v2.3"

    def test_submit_rejected_stays_created_with_note(self, pipeline, tmp_path, monkeypatch):
        storage, ops, host, executor = pipeline
        sim, _ = ops.add_simulator("sum", "true", [])
        ps, _ = ops.find_or_create_parameter_set(sim, {})
        (run,), _ = ops.find_or_create_runs_upto(ps, 1, host)

        backend = executor.registry.resolve(host)

        def reject(request):
            from sweepd.errors import SubmitRejected
            raise SubmitRejected("queue closed")

        monkeypatch.setattr(backend, "submit", reject)
        out = executor.dispatch(run)
        assert out.status == "created"
        assert any("queue closed" in n for n in out.error_notes)
        stored = storage.documents.get("runs", run.id)
        assert stored.status == "created"

    def test_duplicate_dispatch_loses_cas_noop(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        ps, _ = ops.find_or_create_parameter_set(sim, {"p1": 1.0, "p2": 2.0})
        (run,), _ = ops.find_or_create_runs_upto(ps, 1, host)
        first = executor.dispatch(run)
        assert first.status == "submitted"
        # a second dispatcher holding the stale snapshot loses and backs off
        second = executor.dispatch(run)
        assert second.status == "submitted"
        assert second.job_id == first.job_id

    def test_corrupt_archive_fails_without_partial_seal(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        ps, _ = ops.find_or_create_parameter_set(sim, {"p1": 1.0, "p2": 2.0})
        (run,), _ = ops.find_or_create_runs_upto(ps, 1, host)
        run = executor.dispatch(run)
        wait_finished(executor, run)
        # truncate the archive in place before collection
        paths = WorkPaths.for_job(host, run.id)
        archive = Path(paths.archive)
        archive.write_bytes(archive.read_bytes()[:20])
        run = storage.documents.get("runs", run.id)
        done = executor.collect(run)
        assert done.status == "failed"
        assert done.exit_code is None
        assert any("corrupt archive" in n for n in done.error_notes)
        files = storage.files.list_files(done.result_dir)
        assert files == ["_error.txt"]  # no partially unpacked content
        # remote work dir retained for post-mortem
        assert Path(paths.work_dir).exists()

    def test_archive_missing_retries_then_fails(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        executor.max_archive_attempts = 3
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        ps, _ = ops.find_or_create_parameter_set(sim, {"p1": 1.0, "p2": 2.0})
        (run,), _ = ops.find_or_create_runs_upto(ps, 1, host)
        run = executor.dispatch(run)
        wait_finished(executor, run)
        paths = WorkPaths.for_job(host, run.id)
        Path(paths.archive).unlink()
        run = storage.documents.get("runs", run.id)
        run = executor.collect(run)
        assert run.status == "running"  # first miss: retried later
        run = executor.collect(run)
        assert run.status == "running"
        run = executor.collect(run)
        assert run.status == "failed"
        assert any("archive missing" in n for n in run.error_notes)

    def test_malformed_status_file_fails_raw_retained(self, pipeline, tmp_path, work_base):
        storage, ops, host, executor = pipeline
        # stub that overwrites _status.json is not enough: the executor
        # writes it after the command; corrupt the archive contents instead
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        ps, _ = ops.find_or_create_parameter_set(sim, {"p1": 1.0, "p2": 2.0})
        (run,), _ = ops.find_or_create_runs_upto(ps, 1, host)
        run = executor.dispatch(run)
        wait_finished(executor, run)
        # rebuild the archive with a mangled _status.json
        import subprocess
        paths = WorkPaths.for_job(host, run.id)
        (Path(paths.work_dir) / "_status.json").write_text("not json at all")
        subprocess.run(["tar", "-czf", paths.archive, "-C", str(work_base), run.id],
                       check=True)
        run = storage.documents.get("runs", run.id)
        done = executor.collect(run)
        assert done.status == "failed"
        assert any("malformed status file" in n for n in done.error_notes)
        raw = storage.files.abspath(done.result_dir) / "_status.json"
        assert raw.read_text() == "not json at all"

    def test_reserved_collision_executor_files_win(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        body = """
        import json
        with open("_status.json", "w") as fh:
            json.dump({"exit_code": 99, "forged": True}, fh)
        with open("_time.txt", "w") as fh:
            fh.write("99999\\n")
        with open("real_output.txt", "w") as fh:
            fh.write("data\\n")
        """
        command = write_stub(tmp_path, "collider.py", body)
        sim, warnings = ops.add_simulator("collider", command, [])
        assert any("_status.json" in w for w in warnings)
        ps, (run,) = run_pipeline(executor, ops, sim, {}, host)
        assert run.status == "finished"
        assert run.exit_code == 0
        status = json.loads((storage.files.abspath(run.result_dir) / "_status.json").read_text())
        assert status["exit_code"] == 0
        assert "forged" not in status
        assert run.elapsed_seconds < 99999

    def test_input_modes_produce_identical_results(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim_args, _ = ops.add_simulator("args_mode", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}],
            input_mode="arguments")
        sim_json, _ = ops.add_simulator("json_mode", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}],
            input_mode="json_file")
        _, (run_a,) = run_pipeline(executor, ops, sim_args, {"p1": 1.5, "p2": 2.5}, host)
        _, (run_j,) = run_pipeline(executor, ops, sim_json, {"p1": 1.5, "p2": 2.5}, host)
        assert run_a.status == run_j.status == "finished"
        assert run_a.seed == run_j.seed
        # identical simulation results: same content digest over outputs
        assert run_a.result_digest == run_j.result_digest
        # and _input.json is not part of the collected results
        files = storage.files.list_files(run_j.result_dir)
        assert "_input.json" not in files

    def test_current_directory_contract(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        body = """
        import os
        os.makedirs("sub/dir", exist_ok=True)
        open("a.txt", "w").write("a")
        open("sub/dir/b.txt", "w").write("b")
        """
        command = write_stub(tmp_path, "writer.py", body)
        sim, _ = ops.add_simulator("writer", command, [])
        _, (run,) = run_pipeline(executor, ops, sim, {}, host)
        files = storage.files.list_files(run.result_dir)
        assert files == ["_status.json", "_time.txt", "_version.txt",
                         "a.txt", "sub/dir/b.txt"]

    def test_determinism_same_seed_same_digest(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        _, (first,) = run_pipeline(executor, ops, sim, {"p1": 4.0, "p2": 8.0}, host)

        # a second, fully separate pipeline over the same point and seed
        storage2 = type(storage)(storage.data_root.parent / "data2")
        from sweepd.ops import Ops
        ops2 = Ops(storage2)
        host2 = ops2.add_host("local", work_base_dir=str(tmp_path / "work2"),
                              xsub_path="fork", max_concurrent_jobs=8)
        sim2, _ = ops2.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        executor2 = Executor(storage2, SchedulerRegistry(storage2.data_root))
        _, (second,) = run_pipeline(executor2, ops2, sim2, {"p1": 4.0, "p2": 8.0}, host2)

        assert first.seed == second.seed == 0
        assert first.result_digest == second.result_digest


class TestCancel:
    def test_cancel_created_run(self, pipeline):
        storage, ops, host, executor = pipeline
        sim, _ = ops.add_simulator("s", "true", [])
        ps, _ = ops.find_or_create_parameter_set(sim, {})
        (run,), _ = ops.find_or_create_runs_upto(ps, 1, host)
        out = executor.cancel(run)
        assert out.status == "cancelled"

    def test_cancel_submitted_run_deletes_job(self, pipeline, tmp_path):
        storage, ops, host, executor = pipeline
        script_cmd = write_stub(tmp_path, "sleeper.py", "import time\ntime.sleep(30)\n")
        sim, _ = ops.add_simulator("sleeper", script_cmd, [])
        ps, _ = ops.find_or_create_parameter_set(sim, {})
        (run,), _ = ops.find_or_create_runs_upto(ps, 1, host)
        run = executor.dispatch(run)
        assert run.status == "submitted"
        out = executor.cancel(run)
        assert out.status == "cancelled"
        client = executor.registry.resolve(host)
        deadline = time.time() + 5
        while time.time() < deadline and client.status(run.job_id).state != "finished":
            time.sleep(0.05)
        assert client.status(run.job_id).state == "finished"

    def test_cancel_finished_is_illegal(self, pipeline, tmp_path):
        from sweepd.errors import IllegalTransition
        storage, ops, host, executor = pipeline
        command = write_stub(tmp_path, "stub.py", STUB_SUM)
        sim, _ = ops.add_simulator("sum", command, [
            {"name": "p1", "kind": "float"}, {"name": "p2", "kind": "float"}])
        _, (run,) = run_pipeline(executor, ops, sim, {"p1": 1.0, "p2": 2.0}, host)
        with pytest.raises(IllegalTransition):
            executor.cancel(run)
