"""Scheduler wrapper CLI: one executable, three command names.

Installed as ``xsub``, ``xstat`` and ``xdel`` (all entry points into
this module; the invoked name selects the action).  Wire contract,
single-line JSON on stdout:

    xsub <script> --work-dir D --params-json '<json>'   -> {"job_id": "..."}
    xstat <job_id>                                      -> {"status": "queued|running|finished"}
    xdel <job_id>                                       -> exit 0

A non-zero exit signals rejection or an unreachable backend, with the
message on stderr.  Job state is kept under a state directory
(--state-dir or $XSUB_STATE_DIR) so each invocation, being a separate
process, sees the jobs started by earlier ones.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ..errors import SubmitRejected, SweepdError
from .base import SchedulerRequest
from .fork import ForkBackend

DEFAULT_STATE_DIR = "~/.xsub-state"


def _state_dir(value: str | None) -> Path:
    raw = value or os.environ.get("XSUB_STATE_DIR") or DEFAULT_STATE_DIR
    return Path(raw).expanduser()


def run_xsub(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="xsub", description="Submit a job script.")
    parser.add_argument("script")
    parser.add_argument("--work-dir", required=True)
    parser.add_argument("--params-json", default="{}")
    parser.add_argument("--state-dir")
    args = parser.parse_args(argv)
    try:
        params = json.loads(args.params_json)
    except json.JSONDecodeError as exc:
        print(f"bad --params-json: {exc}", file=sys.stderr)
        return 2
    backend = ForkBackend(_state_dir(args.state_dir))
    try:
        job_id = backend.submit(SchedulerRequest(args.script, args.work_dir, params))
    except SubmitRejected as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(json.dumps({"job_id": job_id}))
    return 0


def run_xstat(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="xstat", description="Report job status.")
    parser.add_argument("job_id")
    parser.add_argument("--state-dir")
    args = parser.parse_args(argv)
    backend = ForkBackend(_state_dir(args.state_dir))
    status = backend.status(args.job_id)
    print(json.dumps({"status": status.state}))
    return 0


def run_xdel(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="xdel", description="Delete a job.")
    parser.add_argument("job_id")
    parser.add_argument("--state-dir")
    args = parser.parse_args(argv)
    backend = ForkBackend(_state_dir(args.state_dir))
    backend.delete(args.job_id)
    return 0


_ACTIONS = {"xsub": run_xsub, "xstat": run_xstat, "xdel": run_xdel}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    prog = Path(sys.argv[0]).name
    if prog not in _ACTIONS and argv and argv[0] in _ACTIONS:
        prog = argv.pop(0)
    action = _ACTIONS.get(prog)
    if action is None:
        print(f"unknown wrapper action {prog!r}; expected one of {sorted(_ACTIONS)}",
              file=sys.stderr)
        return 2
    try:
        return action(argv)
    except SweepdError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
