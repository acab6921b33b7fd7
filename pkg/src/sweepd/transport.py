"""Transports: every remote effect goes through this interface.

The local transport operates on the filesystem directly; the SSH
transport shells out to ssh/scp with key-based auth (no passwords).
Keeping all effects behind one interface lets tests run the full
pipeline in-process.
"""
from __future__ import annotations

import shlex
import shutil
import subprocess
from pathlib import Path

from .errors import TransportFailure
from .model import Host


class LocalTransport:
    kind = "local"

    def mkdirs(self, path: str) -> None:
        Path(path).mkdir(parents=True, exist_ok=True)

    def exists(self, path: str) -> bool:
        return Path(path).exists()

    def upload_bytes(self, data: bytes, remote_path: str) -> None:
        target = Path(remote_path)
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.parent / (target.name + ".part")
        tmp.write_bytes(data)
        tmp.replace(target)

    def upload_tree(self, local_dir: str, remote_dir: str) -> None:
        shutil.copytree(local_dir, remote_dir, dirs_exist_ok=True)

    def download_file(self, remote_path: str, local_path: str) -> None:
        if not Path(remote_path).exists():
            raise TransportFailure(f"no such file: {remote_path}")
        Path(local_path).parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(remote_path, local_path)

    def remove_tree(self, path: str) -> None:
        p = Path(path)
        if p.is_dir():
            shutil.rmtree(p, ignore_errors=True)
        elif p.exists():
            p.unlink()

    def run(self, command: str, cwd: str | None = None) -> tuple[int, str, str]:
        try:
            proc = subprocess.run(["bash", "-c", command], cwd=cwd,
                                  capture_output=True, text=True, timeout=600)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TransportFailure(f"local exec failed: {exc}") from exc
        return proc.returncode, proc.stdout, proc.stderr


class SshTransport:
    """Key-based SSH/SCP transport; every operation is one subprocess."""

    kind = "ssh"

    def __init__(self, host: Host):
        self.host = host

    def _target(self) -> str:
        user = f"{self.host.user}@" if self.host.user else ""
        return f"{user}{self.host.address}"

    def _ssh_base(self) -> list[str]:
        return ["ssh", "-o", "BatchMode=yes", "-p", str(self.host.port), self._target()]

    def _scp_base(self) -> list[str]:
        return ["scp", "-o", "BatchMode=yes", "-P", str(self.host.port)]

    def _check(self, argv: list[str], what: str) -> subprocess.CompletedProcess:
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=600)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TransportFailure(f"{what} failed: {exc}") from exc
        if proc.returncode != 0:
            raise TransportFailure(f"{what} failed: {proc.stderr.strip()}")
        return proc

    def mkdirs(self, path: str) -> None:
        self._check(self._ssh_base() + [f"mkdir -p {shlex.quote(path)}"], "mkdir")

    def exists(self, path: str) -> bool:
        rc, _, _ = self.run(f"test -e {shlex.quote(path)}")
        return rc == 0

    def upload_bytes(self, data: bytes, remote_path: str) -> None:
        quoted = shlex.quote(remote_path)
        argv = self._ssh_base() + [f"cat > {quoted}.part && mv {quoted}.part {quoted}"]
        try:
            proc = subprocess.run(argv, input=data, capture_output=True, timeout=600)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TransportFailure(f"upload failed: {exc}") from exc
        if proc.returncode != 0:
            raise TransportFailure(f"upload failed: {proc.stderr.decode(errors='replace').strip()}")

    def upload_tree(self, local_dir: str, remote_dir: str) -> None:
        self._check(self._scp_base() + ["-r", local_dir, f"{self._target()}:{remote_dir}"],
                    "upload tree")

    def download_file(self, remote_path: str, local_path: str) -> None:
        Path(local_path).parent.mkdir(parents=True, exist_ok=True)
        self._check(self._scp_base() + [f"{self._target()}:{remote_path}", local_path],
                    "download")

    def remove_tree(self, path: str) -> None:
        self._check(self._ssh_base() + [f"rm -rf {shlex.quote(path)}"], "remove")

    def run(self, command: str, cwd: str | None = None) -> tuple[int, str, str]:
        if cwd:
            command = f"cd {shlex.quote(cwd)} && {command}"
        try:
            proc = subprocess.run(self._ssh_base() + [command],
                                  capture_output=True, text=True, timeout=600)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TransportFailure(f"remote exec failed: {exc}") from exc
        return proc.returncode, proc.stdout, proc.stderr


def transport_for(host: Host):
    if host.transport == "local":
        return LocalTransport()
    return SshTransport(host)
