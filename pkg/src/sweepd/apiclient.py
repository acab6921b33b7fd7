"""Thin HTTP client for the API service, mirroring the operation layer.

Used by the CLI when a service URL is configured instead of a local data
root.  Raises the same domain exceptions the embedded path raises so the
CLI's error handling is identical in both modes.
"""
from __future__ import annotations

from typing import Any, Optional

import httpx

from .errors import (
    DuplicateKey,
    IllegalTransition,
    NotFound,
    SweepdError,
    TransportFailure,
    ValidationError,
)

_STATUS_ERRORS = {
    403: SweepdError,
    404: NotFound,
    409: DuplicateKey,
    422: ValidationError,
}


class ApiClient:
    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def _call(self, method: str, path: str, **kwargs) -> Any:
        try:
            resp = self._client.request(method, path, **kwargs)
        except httpx.HTTPError as exc:
            raise TransportFailure(f"API unreachable: {exc}") from exc
        if resp.status_code >= 400:
            try:
                payload = resp.json()
            except ValueError:
                payload = {"message": resp.text}
            message = payload.get("message") or payload.get("error") or resp.text
            if payload.get("error") == "illegal_transition":
                raise IllegalTransition(message)
            klass = _STATUS_ERRORS.get(resp.status_code, SweepdError)
            raise klass(message)
        if resp.headers.get("content-type", "").startswith("application/json"):
            return resp.json()
        return resp.content

    # -- mirrored operations -------------------------------------------------

    def spec(self) -> dict:
        return self._call("GET", "/spec")

    def add_host(self, **fields) -> dict:
        return self._call("POST", "/hosts", json=fields)

    def list_hosts(self) -> list[dict]:
        return self._call("GET", "/hosts")["items"]

    def add_simulator(self, **fields) -> dict:
        return self._call("POST", "/simulators", json=fields)

    def list_simulators(self) -> list[dict]:
        return self._call("GET", "/simulators")["items"]

    def get_simulator(self, ref: str) -> dict:
        try:
            return self._call("GET", f"/simulators/{ref}")
        except NotFound:
            for sim in self.list_simulators():
                if sim["name"] == ref:
                    return sim
            raise

    def create_parameter_set(self, sim_id: str, values: dict) -> tuple[dict, bool]:
        out = self._call("POST", f"/simulators/{sim_id}/parameter_sets", json=values)
        return out["parameter_set"], out["created"]

    def list_parameter_sets(self, sim_id: str) -> list[dict]:
        return self._call("GET", f"/simulators/{sim_id}/parameter_sets")["items"]

    def runs_upto(self, ps_id: str, target: int, host: str) -> tuple[list[dict], int]:
        out = self._call("POST", f"/parameter_sets/{ps_id}/runs_upto",
                         json={"target": target, "host": host})
        return out["items"], out["created"]

    def list_runs(self, status: Optional[str] = None,
                  parameter_set_id: Optional[str] = None,
                  simulator_id: Optional[str] = None) -> list[dict]:
        params = {}
        if status:
            params["status"] = status
        if parameter_set_id:
            params["parameter_set_id"] = parameter_set_id
        if simulator_id:
            params["simulator_id"] = simulator_id
        return self._call("GET", "/runs", params=params)["items"]

    def cancel_run(self, run_id: str) -> dict:
        return self._call("POST", f"/runs/{run_id}/cancel")

    def run_files(self, run_id: str) -> list[str]:
        return self._call("GET", f"/runs/{run_id}/files")["items"]

    def fetch_result(self, run_id: str, path: str) -> bytes:
        return self._call("GET", f"/runs/{run_id}/file", params={"path": path})

    def add_analyzer(self, **fields) -> dict:
        return self._call("POST", "/analyzers", json=fields)

    def list_analyzers(self, simulator_id: Optional[str] = None) -> list[dict]:
        params = {"simulator_id": simulator_id} if simulator_id else None
        return self._call("GET", "/analyzers", params=params)["items"]

    def create_analysis(self, analyzer_id: str, target_id: str, parameters: dict,
                        host: str) -> dict:
        return self._call("POST", "/analyses",
                          json={"analyzer_id": analyzer_id, "target_id": target_id,
                                "parameters": parameters, "host": host})

    def plot_data(self, sim_id: str, x: str, y: str) -> dict:
        return self._call("GET", f"/simulators/{sim_id}/plot_data",
                          params={"x": x, "y": y})

    def plot_data_anchor(self, ps_id: str, x: str, y: str) -> dict:
        return self._call("GET", f"/parameter_sets/{ps_id}/plot_data",
                          params={"x": x, "y": y})
