"""Independent oracles used to cross-check pipeline results.

These reimplement the checked quantities from scratch (directory walks,
hand-rolled statistics) so the tests never verify the implementation
against itself.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from pathlib import Path

EXECUTOR_FILES = {"_status.json", "_time.txt", "_version.txt"}


def independent_tree_digest(root) -> str:
    """Recursive content digest, written without touching package code."""
    root = Path(root)
    pairs = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for fname in sorted(filenames):
            full = Path(dirpath) / fname
            rel = full.relative_to(root).as_posix()
            if rel in EXECUTOR_FILES:
                continue
            file_hash = hashlib.sha256(full.read_bytes()).hexdigest()
            pairs.append((rel, file_hash))
    pairs.sort()
    acc = hashlib.sha256()
    for rel, file_hash in pairs:
        acc.update(rel.encode() + b"\0" + file_hash.encode() + b"\n")
    return acc.hexdigest()


def brute_force_plot_rows(files_root, simulator_id: str, x_name: str, y_name: str):
    """Aggregate y over finished runs straight from the raw result files.

    Walks the file-store layout, reads each run's _output.json, and
    computes mean and standard error with explicit formulas.  Returns a
    list of dicts keyed by parameter-set id.
    """
    files_root = Path(files_root)
    sim_dir = files_root / "simulators" / simulator_id / "ps"
    rows = []
    if not sim_dir.exists():
        return rows
    for ps_dir in sorted(sim_dir.iterdir()):
        runs_dir = ps_dir / "runs"
        if not runs_dir.exists():
            continue
        samples = []
        excluded = 0
        for run_dir in sorted(p for p in runs_dir.iterdir() if p.is_dir()):
            output = run_dir / "_output.json"
            status = run_dir / "_status.json"
            if not status.exists():
                continue
            if json.loads(status.read_text()).get("exit_code") != 0:
                continue
            if not output.exists():
                excluded += 1
                continue
            payload = json.loads(output.read_text())
            value = payload.get(y_name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                excluded += 1
                continue
            samples.append(float(value))
        n = len(samples)
        if n == 0:
            mean = stderr = None
        else:
            mean = sum(samples) / n
            if n > 1:
                acc = 0.0
                for s in samples:
                    acc += (s - mean) * (s - mean)
                stderr = math.sqrt(acc / (n - 1)) / math.sqrt(n)
            else:
                stderr = 0.0
        rows.append({"parameter_set_id": ps_dir.name, "mean": mean,
                     "stderr": stderr, "n": n, "excluded": excluded})
    return rows


def parse_plot_csv(text: str):
    """Parse the plot-data CSV into typed rows."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    assert lines[0] == "x,y_mean,y_stderr,n,excluded", lines[0]
    rows = []
    for line in lines[1:]:
        x, mean, stderr, n, excluded = line.split(",")
        rows.append({
            "x": float(x),
            "y_mean": float(mean) if mean else None,
            "y_stderr": float(stderr) if stderr else None,
            "n": int(n),
            "excluded": int(excluded),
        })
    return rows
