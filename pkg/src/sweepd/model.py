"""Domain model: the three-layer experiment hierarchy and its rules.

Simulators own ParameterSets, ParameterSets own Runs.  Analyzers are
post-processes registered per simulator; an executed instance is an
Analysis.  Hosts describe where jobs run.  All records are immutable
snapshots; mutation happens by building a new record and handing it to
the store.
"""
from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Optional

from .errors import (
    IllegalTransition,
    MissingParameter,
    TypeMismatch,
    UnknownParameter,
    ValidationError,
)

PARAMETER_KINDS = ("integer", "float", "string", "boolean")
INPUT_MODES = ("arguments", "json_file")
ANALYZER_SCOPES = ("on_run", "on_parameter_set")
TRANSPORTS = ("ssh", "local")

STATUSES = ("created", "submitted", "running", "finished", "failed", "cancelled")
TERMINAL_STATUSES = ("finished", "failed", "cancelled")

# Files the executor owns inside every work directory.  Simulators must
# not create files with these names; on collision the executor-written
# version wins because the job script writes them after the command exits.
RESERVED_OUTPUT_FILES = ("_status.json", "_time.txt", "_version.txt")

RESERVED_FILES_NOTICE = (
    "outputs must be written to the current directory and must not collide "
    "with the reserved files _status.json, _time.txt, _version.txt "
    "(the executor overwrites them after the command exits); "
    "_input.json and _output.json are reserved for input/output conventions"
)


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def new_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class ParameterDefinition:
    name: str
    kind: str
    default: Any = None
    description: str = ""
    position: int = 0

    def __post_init__(self):
        if self.kind not in PARAMETER_KINDS:
            raise ValidationError(f"unknown parameter kind {self.kind!r}")
        if not self.name or not self.name.replace("_", "a").isalnum():
            raise ValidationError(f"invalid parameter name {self.name!r}")
        if self.default is not None:
            object.__setattr__(self, "default", coerce_value(self.name, self.kind, self.default))


def validate_definitions(definitions: list[ParameterDefinition]) -> None:
    names = [d.name for d in definitions]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate parameter names in definition list")
    positions = sorted(d.position for d in definitions)
    if positions != list(range(len(definitions))):
        raise ValidationError("parameter positions must form a contiguous 0..n-1 sequence")


@dataclass(frozen=True)
class Simulator:
    id: str
    name: str
    command: str
    parameter_definitions: tuple[ParameterDefinition, ...] = ()
    input_mode: str = "arguments"
    description: str = ""
    version_command: str = ""
    created_at: str = field(default_factory=now_iso)

    def __post_init__(self):
        if not self.command:
            raise ValidationError("simulator command must be non-empty")
        if self.input_mode not in INPUT_MODES:
            raise ValidationError(f"unknown input mode {self.input_mode!r}")
        object.__setattr__(self, "parameter_definitions", tuple(self.parameter_definitions))
        validate_definitions(list(self.parameter_definitions))


@dataclass(frozen=True)
class ParameterSet:
    id: str
    simulator_id: str
    values: dict[str, Any]
    canonical_key: str
    created_at: str = field(default_factory=now_iso)


@dataclass(frozen=True)
class Run:
    id: str
    parameter_set_id: str
    seed: int
    host_id: str
    status: str = "created"
    job_id: Optional[str] = None
    submitted_at: Optional[str] = None
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    elapsed_seconds: Optional[float] = None
    exit_code: Optional[int] = None
    simulator_version: Optional[str] = None
    result_dir: Optional[str] = None
    result_digest: Optional[str] = None
    error_notes: tuple[str, ...] = ()
    dispatch_attempts: int = 0
    collect_attempts: int = 0
    created_at: str = field(default_factory=now_iso)


@dataclass(frozen=True)
class Analyzer:
    id: str
    simulator_id: str
    name: str
    command: str
    parameter_definitions: tuple[ParameterDefinition, ...] = ()
    input_mode: str = "arguments"
    scope: str = "on_run"
    description: str = ""
    version_command: str = ""
    created_at: str = field(default_factory=now_iso)

    def __post_init__(self):
        if not self.command:
            raise ValidationError("analyzer command must be non-empty")
        if self.input_mode not in INPUT_MODES:
            raise ValidationError(f"unknown input mode {self.input_mode!r}")
        if self.scope not in ANALYZER_SCOPES:
            raise ValidationError(f"unknown analyzer scope {self.scope!r}")
        object.__setattr__(self, "parameter_definitions", tuple(self.parameter_definitions))
        validate_definitions(list(self.parameter_definitions))


@dataclass(frozen=True)
class Analysis:
    id: str
    analyzer_id: str
    target_id: str
    host_id: str
    values: dict[str, Any] = field(default_factory=dict)
    input_run_ids: tuple[str, ...] = ()
    status: str = "created"
    job_id: Optional[str] = None
    submitted_at: Optional[str] = None
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    elapsed_seconds: Optional[float] = None
    exit_code: Optional[int] = None
    simulator_version: Optional[str] = None
    result_dir: Optional[str] = None
    result_digest: Optional[str] = None
    error_notes: tuple[str, ...] = ()
    dispatch_attempts: int = 0
    collect_attempts: int = 0
    created_at: str = field(default_factory=now_iso)


@dataclass(frozen=True)
class Host:
    id: str
    name: str
    address: str = "local"
    port: int = 22
    user: str = ""
    transport: str = "local"
    xsub_path: str = "fork"
    work_base_dir: str = ""
    polling_interval_seconds: int = 5
    max_concurrent_jobs: int = 1
    scheduler_template: str = "none"
    scheduler_params: dict[str, Any] = field(default_factory=dict)
    created_at: str = field(default_factory=now_iso)

    def __post_init__(self):
        if self.transport not in TRANSPORTS:
            raise ValidationError(f"unknown transport {self.transport!r}")
        if self.max_concurrent_jobs < 1:
            raise ValidationError("max_concurrent_jobs must be >= 1")
        if self.polling_interval_seconds < 1:
            raise ValidationError("polling_interval_seconds must be >= 1")


# --- canonical values -------------------------------------------------

def coerce_value(name: str, kind: str, value: Any) -> Any:
    """Coerce ``value`` to ``kind``, accepting only lossless conversions."""
    if kind == "boolean":
        if isinstance(value, bool):
            return value
        raise TypeMismatch(f"parameter {name!r} expects boolean, got {value!r}")
    if kind == "integer":
        if isinstance(value, bool):
            raise TypeMismatch(f"parameter {name!r} expects integer, got boolean")
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise TypeMismatch(f"parameter {name!r} expects integer, got {value!r}")
    if kind == "float":
        if isinstance(value, bool):
            raise TypeMismatch(f"parameter {name!r} expects float, got boolean")
        if isinstance(value, (int, float)):
            return float(value)
        raise TypeMismatch(f"parameter {name!r} expects float, got {value!r}")
    if kind == "string":
        if isinstance(value, str):
            return value
        raise TypeMismatch(f"parameter {name!r} expects string, got {value!r}")
    raise ValidationError(f"unknown parameter kind {kind!r}")


def render_value(value: Any) -> str:
    """Locale-independent canonical rendering of one parameter value.

    Floats use the shortest round-trip decimal; strings are JSON-encoded
    so separator characters in user strings cannot forge another key.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return json.dumps(value, ensure_ascii=True)


def canonicalize(
    definitions: list[ParameterDefinition] | tuple[ParameterDefinition, ...],
    values: dict[str, Any],
) -> tuple[dict[str, Any], str]:
    """Complete ``values`` against ``definitions`` and derive the canonical key.

    Returns a full, type-correct value map (defaults filled) and a
    deterministic key string over names sorted lexicographically.
    """
    by_name = {d.name: d for d in definitions}
    for name in values:
        if name not in by_name:
            raise UnknownParameter(f"unknown parameter {name!r}")
    complete: dict[str, Any] = {}
    for d in definitions:
        if d.name in values:
            complete[d.name] = coerce_value(d.name, d.kind, values[d.name])
        elif d.default is not None:
            complete[d.name] = d.default
        else:
            raise MissingParameter(f"parameter {d.name!r} has no value and no default")
    key = ";".join(f"{n}={render_value(complete[n])}" for n in sorted(complete))
    return complete, key


def next_seed(existing_seeds) -> int:
    """Smallest non-negative integer not present in ``existing_seeds``."""
    used = set(existing_seeds)
    seed = 0
    while seed in used:
        seed += 1
    return seed


# --- lifecycle state machine ------------------------------------------

EVENTS = ("submitted", "started", "succeeded", "failed", "cancelled")

_LEGAL_EVENTS = {
    "created": ("submitted", "cancelled"),
    "submitted": ("started", "cancelled"),
    "running": ("succeeded", "failed"),
    "finished": (),
    "failed": (),
    "cancelled": (),
}


def transition(record, event: str, *, job_id: str | None = None,
               exit_code: int | None = None, timestamp: str | None = None,
               **fields):
    """Apply a lifecycle event to a Run or Analysis snapshot.

    Returns the updated record; the caller persists it with a
    compare-and-swap on the old status.  Illegal (state, event) pairs
    raise without producing a new record.
    """
    if event not in EVENTS:
        raise IllegalTransition(f"unknown event {event!r}")
    if event not in _LEGAL_EVENTS[record.status]:
        raise IllegalTransition(
            f"event {event!r} not legal from status {record.status!r}")
    ts = timestamp or now_iso()
    if event == "submitted":
        if not job_id:
            raise IllegalTransition("submitted event requires a job_id")
        return replace(record, status="submitted", job_id=job_id,
                       submitted_at=ts, **fields)
    if event == "started":
        return replace(record, status="running", started_at=ts, **fields)
    if event == "succeeded":
        if exit_code not in (None, 0):
            raise IllegalTransition("succeeded event requires exit_code 0")
        return replace(record, status="finished", exit_code=0,
                       finished_at=fields.pop("finished_at", None) or ts, **fields)
    if event == "failed":
        if exit_code == 0:
            raise IllegalTransition("failed event cannot carry exit_code 0")
        return replace(record, status="failed", exit_code=exit_code,
                       finished_at=fields.pop("finished_at", None) or ts, **fields)
    # cancelled
    return replace(record, status="cancelled", finished_at=ts, **fields)


def append_note(record, note: str):
    return replace(record, error_notes=record.error_notes + (note,))
