"""Scheduler header templates: directive lines prepended to job scripts.

Desk-scale backends (fork, simulated) take no directives; Torque and
Slurm templates are provided for batch hosts but are not exercised by
the test suite, which has no batch system to talk to.
"""
from __future__ import annotations

from typing import Any


def _torque(params: dict[str, Any]) -> list[str]:
    lines = []
    if "walltime" in params:
        lines.append(f"#PBS -l walltime={params['walltime']}")
    nodes = params.get("nodes", 1)
    ppn = params.get("mpi_procs", params.get("ppn"))
    if ppn:
        lines.append(f"#PBS -l nodes={nodes}:ppn={ppn}")
    elif "nodes" in params:
        lines.append(f"#PBS -l nodes={nodes}")
    if "queue" in params:
        lines.append(f"#PBS -q {params['queue']}")
    return lines


def _slurm(params: dict[str, Any]) -> list[str]:
    lines = []
    if "walltime" in params:
        lines.append(f"#SBATCH --time={params['walltime']}")
    if "nodes" in params:
        lines.append(f"#SBATCH --nodes={params['nodes']}")
    if "mpi_procs" in params:
        lines.append(f"#SBATCH --ntasks={params['mpi_procs']}")
    if "queue" in params:
        lines.append(f"#SBATCH --partition={params['queue']}")
    return lines


HEADER_TEMPLATES = {
    "none": lambda params: [],
    "torque": _torque,
    "slurm": _slurm,
}


def header_lines(template: str, params: dict[str, Any]) -> list[str]:
    try:
        render = HEADER_TEMPLATES[template]
    except KeyError:
        raise ValueError(f"unknown scheduler template {template!r}") from None
    return render(params)
