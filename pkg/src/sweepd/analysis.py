"""Analyses: post-processes over the outputs of one Run or of all
finished Runs in a ParameterSet.

An Analysis travels the same lifecycle as a Run; the only differences
are where its inputs come from (staged copies of result directories
under ``_input/``) and where its own results land in the file store.
"""
from __future__ import annotations

import json
import logging
from dataclasses import replace

from . import model
from .errors import NotFound, ScopeMismatch, TargetNotReady
from .model import Analysis, Analyzer, Host
from .store import Storage

logger = logging.getLogger(__name__)


def create_analysis(storage: Storage, analyzer: Analyzer, target_id: str,
                    parameters: dict, host: Host) -> Analysis:
    """Register one analysis in status created; the worker picks it up."""
    docs = storage.documents
    if analyzer.scope == "on_run":
        try:
            run = docs.get("runs", target_id)
        except NotFound:
            if _exists(docs, "parameter_sets", target_id):
                raise ScopeMismatch(
                    f"on_run analyzer cannot target parameter set {target_id}") from None
            raise
        if run.status != "finished":
            raise TargetNotReady(f"run {target_id} is {run.status}, not finished")
    else:
        try:
            ps = docs.get("parameter_sets", target_id)
        except NotFound:
            if _exists(docs, "runs", target_id):
                raise ScopeMismatch(
                    f"on_parameter_set analyzer cannot target run {target_id}") from None
            raise
        finished = docs.query("runs", {"parameter_set_id": ps.id, "status": "finished"})
        if not finished:
            raise TargetNotReady(f"parameter set {target_id} has no finished runs")
    values, _ = model.canonicalize(analyzer.parameter_definitions, parameters)
    analysis = Analysis(id=model.new_id(), analyzer_id=analyzer.id,
                        target_id=target_id, host_id=host.id, values=values)
    docs.put(analysis)
    logger.info("analysis %s created for %s target %s", analysis.id, analyzer.scope, target_id)
    return analysis


def _exists(docs, collection: str, doc_id: str) -> bool:
    try:
        docs.get(collection, doc_id)
        return True
    except NotFound:
        return False


def input_runs(storage: Storage, analysis: Analysis) -> list[model.Run]:
    """The runs whose results feed this analysis, at this moment."""
    analyzer = storage.documents.get("analyzers", analysis.analyzer_id)
    if analyzer.scope == "on_run":
        run = storage.documents.get("runs", analysis.target_id)
        if run.status != "finished":
            raise TargetNotReady(f"run {run.id} is {run.status}, not finished")
        return [run]
    finished = storage.documents.query(
        "runs", {"parameter_set_id": analysis.target_id, "status": "finished"})
    if not finished:
        raise TargetNotReady(f"parameter set {analysis.target_id} has no finished runs")
    return finished


def analysis_input_payload(analyzer: Analyzer, analysis: Analysis,
                           run_ids: list[str]) -> str:
    ordered = sorted(analyzer.parameter_definitions, key=lambda d: d.position)
    payload = {d.name: analysis.values[d.name] for d in ordered}
    payload["_run_ids"] = run_ids
    return json.dumps(payload, separators=(",", ":")) + "\n"


def stage_analysis_input(transport, storage: Storage, analysis: Analysis,
                         work_dir: str) -> Analysis:
    """Copy target result directories under ``_input/`` and write ``_input.json``.

    The staged run set (finished runs at staging time) is recorded on the
    analysis document so the input snapshot stays auditable afterwards.
    """
    analyzer = storage.documents.get("analyzers", analysis.analyzer_id)
    runs = input_runs(storage, analysis)
    run_ids = sorted(r.id for r in runs)
    for run in runs:
        if not run.result_dir:
            raise TargetNotReady(f"run {run.id} has no result directory")
        src = storage.files.abspath(run.result_dir)
        transport.upload_tree(str(src), f"{work_dir}/_input/{run.id}")
    data = analysis_input_payload(analyzer, analysis, run_ids).encode("utf-8")
    transport.upload_bytes(data, f"{work_dir}/_input.json")
    return replace(analysis, input_run_ids=tuple(run_ids))
