"""Embedded persistence: a document store and a result-file store.

Documents are canonical JSON files, one logical collection per record
type, guarded by a cross-process file lock so the worker and the API can
share one data root.  Result files live in a directory tree next to the
documents; finished directories are sealed (sentinel + content digest)
and never mutate afterwards.
"""
from __future__ import annotations

import fcntl
import hashlib
import json
import os
import shutil
import tarfile
import tempfile
import threading
from dataclasses import asdict, fields as dc_fields, replace
from pathlib import Path
from typing import Iterable, Optional

from . import model
from .errors import AlreadySealed, CorruptSnapshot, DigestConflict, DuplicateKey, NotFound

COLLECTIONS = {
    "simulators": model.Simulator,
    "parameter_sets": model.ParameterSet,
    "runs": model.Run,
    "analyzers": model.Analyzer,
    "analyses": model.Analysis,
    "hosts": model.Host,
}

# (collection, field tuple) pairs enforced unique across the collection.
UNIQUE_INDEXES = {
    "simulators": [("name",)],
    "hosts": [("name",)],
    "analyzers": [("simulator_id", "name")],
    "parameter_sets": [("simulator_id", "canonical_key")],
    "runs": [("parameter_set_id", "seed")],
    "analyses": [],
}

SEAL_SUFFIX = ".sealed"


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def to_doc(record) -> dict:
    doc = asdict(record)
    doc["_collection"] = _collection_of(record)
    return doc


def from_doc(collection: str, doc: dict):
    cls = COLLECTIONS[collection]
    doc = {k: v for k, v in doc.items() if not k.startswith("_")}
    if "parameter_definitions" in doc:
        doc["parameter_definitions"] = tuple(
            model.ParameterDefinition(**d) for d in doc["parameter_definitions"])
    for key in ("error_notes", "input_run_ids"):
        if key in doc and doc[key] is not None:
            doc[key] = tuple(doc[key])
    known = {f.name for f in dc_fields(cls)}
    return cls(**{k: v for k, v in doc.items() if k in known})


def _collection_of(record) -> str:
    for name, cls in COLLECTIONS.items():
        if isinstance(record, cls):
            return name
    raise TypeError(f"not a stored record type: {type(record)!r}")


def tree_digest(root: Path, exclude: Iterable[str] = model.RESERVED_OUTPUT_FILES) -> str:
    """SHA-256 over the sorted (path, file-hash) list of a directory tree.

    The executor-written reserved files are excluded by default: they
    carry wall-clock timestamps, and the digest certifies the simulation
    output proper, which must be reproducible for a deterministic
    simulator under a fixed seed.
    """
    excluded = set(exclude)
    entries = []
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(root).as_posix()
        if rel in excluded:
            continue
        h = hashlib.sha256()
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(65536), b""):
                h.update(chunk)
        entries.append((rel, h.hexdigest()))
    top = hashlib.sha256()
    for rel, digest in entries:
        top.update(rel.encode("utf-8") + b"\0" + digest.encode("ascii") + b"\n")
    return top.hexdigest()


class DocumentStore:
    """Filesystem-backed document collections with unique indexes.

    Writes are linearized under a process lock plus an fcntl lock on
    ``<root>/.lock`` so several processes can share the store; documents
    are written atomically (temp file + rename).
    """

    def __init__(self, root_path: str | Path):
        self.root = Path(root_path)
        self.root.mkdir(parents=True, exist_ok=True)
        for name in COLLECTIONS:
            (self.root / name).mkdir(exist_ok=True)
        self._lock_path = self.root / ".lock"
        self._lock_path.touch(exist_ok=True)
        self._local = threading.RLock()

    # -- locking --------------------------------------------------------

    class _Guard:
        def __init__(self, store):
            self.store = store

        def __enter__(self):
            self.store._local.acquire()
            self.fh = open(self.store._lock_path, "r+")
            fcntl.flock(self.fh, fcntl.LOCK_EX)
            return self

        def __exit__(self, *exc):
            fcntl.flock(self.fh, fcntl.LOCK_UN)
            self.fh.close()
            self.store._local.release()

    def locked(self):
        return self._Guard(self)

    # -- paths ----------------------------------------------------------

    def _path(self, collection: str, doc_id: str) -> Path:
        return self.root / collection / f"{doc_id}.json"

    def _write(self, collection: str, doc_id: str, text: str) -> None:
        path = self._path(collection, doc_id)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    # -- core operations --------------------------------------------------

    def put(self, record) -> str:
        collection = _collection_of(record)
        with self.locked():
            self._check_unique(collection, record)
            self._write(collection, record.id, canonical_json(to_doc(record)))
        return record.id

    def _check_unique(self, collection: str, record) -> None:
        for index in UNIQUE_INDEXES[collection]:
            want = tuple(getattr(record, f) for f in index)
            for other in self._iter(collection):
                if other.id == record.id:
                    continue
                if tuple(getattr(other, f) for f in index) == want:
                    raise DuplicateKey(
                        f"{collection} unique index {index} violated by {want!r}")

    def get(self, collection: str, doc_id: str):
        path = self._path(collection, doc_id)
        try:
            with open(path, encoding="utf-8") as fh:
                return from_doc(collection, json.load(fh))
        except FileNotFoundError:
            raise NotFound(f"{collection}/{doc_id}") from None

    def delete(self, collection: str, doc_id: str) -> None:
        with self.locked():
            try:
                self._path(collection, doc_id).unlink()
            except FileNotFoundError:
                raise NotFound(f"{collection}/{doc_id}") from None

    def _iter(self, collection: str):
        for path in (self.root / collection).glob("*.json"):
            try:
                with open(path, encoding="utf-8") as fh:
                    yield from_doc(collection, json.load(fh))
            except (json.JSONDecodeError, FileNotFoundError):
                continue

    def query(self, collection: str, filter: Optional[dict] = None,
              sort: str = "created_at", page: Optional[tuple[int, int]] = None,
              descending: bool = False) -> list:
        """Filtered, stably ordered scan: sort key first, then id."""
        out = []
        for record in self._iter(collection):
            if filter and any(getattr(record, k, None) != v for k, v in filter.items()):
                continue
            out.append(record)
        out.sort(key=lambda r: ((getattr(r, sort, None) is None, getattr(r, sort, None) or ""), r.id),
                 reverse=descending)
        if page is not None:
            offset, limit = page
            out = out[offset:offset + limit]
        return out

    def count(self, collection: str, filter: Optional[dict] = None) -> int:
        return len(self.query(collection, filter))

    def cas_status(self, collection: str, doc_id: str, expected_status: str,
                   new_record) -> bool:
        """Replace the document iff its stored status equals ``expected_status``."""
        with self.locked():
            current = self.get(collection, doc_id)
            if current.status != expected_status:
                return False
            self._write(collection, doc_id, canonical_json(to_doc(new_record)))
            return True

    def update(self, record) -> None:
        """Replace an existing document unconditionally (non-status fields)."""
        collection = _collection_of(record)
        with self.locked():
            self.get(collection, record.id)
            self._write(collection, record.id, canonical_json(to_doc(record)))


class FileStore:
    """Result-file tree: simulators/<sim>/ps/<ps>/runs/<run>/ plus analyses."""

    def __init__(self, root_path: str | Path):
        self.root = Path(root_path)
        self.root.mkdir(parents=True, exist_ok=True)

    def run_rel_dir(self, simulator_id: str, parameter_set_id: str, run_id: str) -> str:
        return f"simulators/{simulator_id}/ps/{parameter_set_id}/runs/{run_id}"

    def run_analysis_rel_dir(self, simulator_id: str, parameter_set_id: str,
                             run_id: str, analysis_id: str) -> str:
        return (f"simulators/{simulator_id}/ps/{parameter_set_id}/runs/{run_id}"
                f"/analyses/{analysis_id}")

    def ps_analysis_rel_dir(self, simulator_id: str, parameter_set_id: str,
                            analysis_id: str) -> str:
        return f"simulators/{simulator_id}/ps/{parameter_set_id}/analyses/{analysis_id}"

    def abspath(self, rel_dir: str) -> Path:
        return self.root / rel_dir

    def reserve(self, rel_dir: str) -> Path:
        path = self.abspath(rel_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def seal_marker(self, rel_dir: str) -> Path:
        path = self.abspath(rel_dir)
        return path.parent / (path.name + SEAL_SUFFIX)

    def is_sealed(self, rel_dir: str) -> bool:
        return self.seal_marker(rel_dir).exists()

    def seal(self, rel_dir: str) -> str:
        """Mark a result directory immutable and return its content digest."""
        if self.is_sealed(rel_dir):
            raise AlreadySealed(rel_dir)
        digest = tree_digest(self.abspath(rel_dir))
        marker = self.seal_marker(rel_dir)
        marker.write_text(json.dumps({"digest": digest, "sealed_at": model.now_iso()}) + "\n")
        return digest

    def sealed_digest(self, rel_dir: str) -> Optional[str]:
        marker = self.seal_marker(rel_dir)
        if not marker.exists():
            return None
        return json.loads(marker.read_text())["digest"]

    def wipe_unsealed(self, rel_dir: str) -> None:
        if self.is_sealed(rel_dir):
            raise AlreadySealed(rel_dir)
        path = self.abspath(rel_dir)
        if path.exists():
            shutil.rmtree(path)

    def list_files(self, rel_dir: str) -> list[str]:
        base = self.abspath(rel_dir)
        if not base.exists():
            return []
        return sorted(p.relative_to(base).as_posix()
                      for p in base.rglob("*") if p.is_file())

    def iter_sealed_dirs(self):
        for marker in self.root.rglob(f"*{SEAL_SUFFIX}"):
            rel = marker.relative_to(self.root).as_posix()[:-len(SEAL_SUFFIX)]
            yield rel


class Storage:
    """One data root bundling the document store and the file store."""

    def __init__(self, data_root: str | Path):
        self.data_root = Path(data_root)
        self.documents = DocumentStore(self.data_root / "documents")
        self.files = FileStore(self.data_root / "files")

    # -- typed helpers ----------------------------------------------------

    def run_rel_dir(self, run: model.Run) -> str:
        ps = self.documents.get("parameter_sets", run.parameter_set_id)
        return self.files.run_rel_dir(ps.simulator_id, ps.id, run.id)

    def analysis_rel_dir(self, analysis: model.Analysis) -> str:
        analyzer = self.documents.get("analyzers", analysis.analyzer_id)
        if analyzer.scope == "on_run":
            run = self.documents.get("runs", analysis.target_id)
            ps = self.documents.get("parameter_sets", run.parameter_set_id)
            return self.files.run_analysis_rel_dir(ps.simulator_id, ps.id, run.id, analysis.id)
        ps = self.documents.get("parameter_sets", analysis.target_id)
        return self.files.ps_analysis_rel_dir(ps.simulator_id, ps.id, analysis.id)

    def rel_dir_for(self, job) -> str:
        if isinstance(job, model.Run):
            return self.run_rel_dir(job)
        return self.analysis_rel_dir(job)

    # -- snapshot export / import -----------------------------------------

    def export_snapshot(self, archive_path: str | Path) -> dict:
        """Write the whole store (documents + files) to one tar.gz archive."""
        archive_path = Path(archive_path)
        archive_path.parent.mkdir(parents=True, exist_ok=True)
        counts = {name: 0 for name in COLLECTIONS}
        with tarfile.open(archive_path, "w:gz") as tar:
            for name in COLLECTIONS:
                for path in sorted((self.documents.root / name).glob("*.json")):
                    tar.add(path, arcname=f"documents/{name}/{path.name}")
                    counts[name] += 1
            if self.files.root.exists():
                for path in sorted(self.files.root.rglob("*")):
                    if path.is_file():
                        rel = path.relative_to(self.files.root).as_posix()
                        tar.add(path, arcname=f"files/{rel}")
        return {"documents": counts, "path": str(archive_path)}

    def import_snapshot(self, archive_path: str | Path) -> dict:
        """Merge a snapshot produced by :meth:`export_snapshot`.

        Id collisions are resolved by content: identical documents are
        skipped, differing ones are rejected and reported.  Imported
        result directories are verified against the recorded digest.
        """
        archive_path = Path(archive_path)
        if not archive_path.exists():
            raise CorruptSnapshot(f"no such archive: {archive_path}")
        report = {"imported": 0, "skipped": 0, "conflicts": [], "files_copied": 0}
        tmp = Path(tempfile.mkdtemp(prefix="sweepd-import-"))
        try:
            try:
                with tarfile.open(archive_path, "r:gz") as tar:
                    _safe_extract(tar, tmp)
            except (tarfile.TarError, EOFError, OSError) as exc:
                raise CorruptSnapshot(f"unreadable archive: {exc}") from exc
            doc_root = tmp / "documents"
            incoming: dict[str, list[Path]] = {}
            if doc_root.exists():
                for name in COLLECTIONS:
                    incoming[name] = sorted((doc_root / name).glob("*.json")) if (doc_root / name).exists() else []
            with self.documents.locked():
                for name, paths in incoming.items():
                    for path in paths:
                        try:
                            doc = json.loads(path.read_text())
                        except json.JSONDecodeError as exc:
                            raise CorruptSnapshot(f"bad document {path.name}: {exc}") from exc
                        doc_id = doc.get("id") or path.stem
                        existing = self.documents._path(name, doc_id)
                        new_text = canonical_json(doc)
                        if existing.exists():
                            if existing.read_text().strip() == new_text.strip():
                                report["skipped"] += 1
                            else:
                                report["conflicts"].append(f"{name}/{doc_id}: document differs")
                            continue
                        self.documents._write(name, doc_id, new_text)
                        report["imported"] += 1
            files_root = tmp / "files"
            if files_root.exists():
                report["files_copied"] += self._merge_files(files_root, report)
            if report["conflicts"]:
                raise DigestConflict("; ".join(report["conflicts"]), report)
            return report
        finally:
            shutil.rmtree(tmp, ignore_errors=True)

    def _merge_files(self, files_root: Path, report: dict) -> int:
        copied = 0
        for src in sorted(files_root.rglob("*")):
            if not src.is_file():
                continue
            rel = src.relative_to(files_root).as_posix()
            dst = self.files.root / rel
            if dst.exists():
                if dst.read_bytes() != src.read_bytes():
                    report["conflicts"].append(f"files/{rel}: content differs")
                continue
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copy2(src, dst)
            copied += 1
        # verify recorded digests for every sealed directory we now hold
        for rel_dir in self.files.iter_sealed_dirs():
            recorded = self.files.sealed_digest(rel_dir)
            actual = tree_digest(self.files.abspath(rel_dir))
            if recorded != actual:
                report["conflicts"].append(
                    f"files/{rel_dir}: digest mismatch (recorded {recorded[:12]}, actual {actual[:12]})")
        return copied

    # -- crash repair -------------------------------------------------------

    def repair(self) -> dict:
        """Reconcile documents and the file tree after a crash.

        Unsealed result directories not referenced by a terminal document
        are removed (collection will redo them); dangling result_dir
        references are cleared with a note.  Sealed directories whose
        owner never reached a terminal state are left for the worker's
        adoption path, which finalizes them from the sealed contents.
        """
        report = {"removed_dirs": 0, "cleared_refs": 0}
        referenced = set()
        for collection in ("runs", "analyses"):
            for record in self.documents.query(collection):
                if record.result_dir:
                    referenced.add(record.result_dir)
                    if not self.files.abspath(record.result_dir).exists():
                        fixed = model.append_note(record, "result directory missing on disk; reference cleared")
                        self.documents.update(replace(fixed, result_dir=None, result_digest=None))
                        report["cleared_refs"] += 1
        for collection in ("runs", "analyses"):
            for record in self.documents.query(collection):
                try:
                    rel = self.rel_dir_for(record)
                except NotFound:
                    continue
                if rel in referenced:
                    continue
                path = self.files.abspath(rel)
                if path.exists() and not self.files.is_sealed(rel) and record.status not in model.TERMINAL_STATUSES:
                    shutil.rmtree(path)
                    report["removed_dirs"] += 1
        return report


def _safe_extract(tar: tarfile.TarFile, dest: Path) -> None:
    if hasattr(tarfile, "data_filter"):
        tar.extractall(dest, filter="data")
        return
    base = dest.resolve()
    for member in tar.getmembers():
        target = (base / member.name).resolve()
        if not str(target).startswith(str(base)):
            raise CorruptSnapshot(f"archive member escapes destination: {member.name}")
    tar.extractall(dest)
