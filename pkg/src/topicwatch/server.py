"""Read-only HTTP API over a completed run directory.

Every /v1 response is the raw bytes of a pipeline artifact; nothing is
recomputed. Artifact integrity is checked against the manifest on every
read; a mismatch produces a 500 diagnostic but keeps the service up.
Unknown selectors produce a 404 carrying the valid options from meta.json.
"""

from __future__ import annotations

import json
import mimetypes
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .pipeline import MANIFEST_NAME, sha256_file

API_PREFIX = "/v1"


class ArtifactDirectory:
    """Hash-checked access to the artifacts of one run."""

    def __init__(self, run_dir: Path | str):
        self.run_dir = Path(run_dir)
        manifest_path = self.run_dir / MANIFEST_NAME
        if not manifest_path.exists():
            raise FileNotFoundError(f"{manifest_path}: not a pipeline run directory")
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        self.hashes: dict[str, str] = {}
        for entry in manifest.get("stages", {}).values():
            self.hashes.update(entry.get("outputs", {}))

    def read(self, rel: str) -> bytes:
        """Raw artifact bytes; KeyError if unknown, ValueError on corruption."""
        if rel not in self.hashes:
            raise KeyError(rel)
        path = self.run_dir / rel
        if not path.exists():
            raise ValueError(f"artifact {rel} missing from disk")
        if sha256_file(path) != self.hashes[rel]:
            raise ValueError(f"artifact {rel} failed its hash check")
        return path.read_bytes()

    def meta(self) -> dict:
        return json.loads(self.read("meta.json").decode("utf-8"))


def _week_key(week: int, network: str) -> str:
    return f"week{week:02d}_{network}"


class ApiHandler(BaseHTTPRequestHandler):
    artifacts: ArtifactDirectory
    static_dir: Path | None = None

    def log_message(self, fmt, *args):  # quiet by default; tests capture stderr
        pass

    def do_GET(self) -> None:
        parsed = urlparse(self.path)
        if parsed.path.startswith(API_PREFIX):
            self._handle_api(parsed.path[len(API_PREFIX) :], parse_qs(parsed.query))
        elif self.static_dir is not None:
            self._handle_static(parsed.path)
        else:
            self._send_json(404, {"error": f"unknown path {parsed.path}; API lives under {API_PREFIX}/"})

    def _handle_api(self, route: str, query: dict[str, list[str]]) -> None:
        try:
            if route == "/meta":
                self._send_artifact("meta.json")
            elif route == "/graph":
                self._handle_graph(query)
            elif route == "/timeseries":
                self._handle_timeseries(query)
            elif route == "/report":
                self._handle_report(query)
            else:
                self._send_json(
                    404,
                    {
                        "error": f"unknown endpoint {route!r}",
                        "valid": ["/meta", "/graph", "/timeseries", "/report"],
                    },
                )
        except ValueError as exc:
            self._send_json(500, {"error": str(exc)})

    def _meta_or_none(self) -> dict | None:
        try:
            return self.artifacts.meta()
        except (KeyError, ValueError):
            return None

    def _handle_graph(self, query) -> None:
        week = query.get("week", [None])[0]
        network = query.get("network", [None])[0]
        cluster = query.get("cluster", ["all"])[0]
        meta = self._meta_or_none() or {}
        try:
            week_num = int(week) if week is not None else None
        except ValueError:
            week_num = None
        if week_num is None or network is None:
            self._send_json(
                404,
                {
                    "error": "graph needs week=<int>&network=<name>[&cluster=...]",
                    "valid": {
                        "weeks": meta.get("weeks", []),
                        "networks": meta.get("networks", []),
                        "clusters": meta.get("clusters", []),
                    },
                },
            )
            return
        rel = f"graphs/{_week_key(week_num, network)}_{cluster}.json"
        try:
            self._send_artifact(rel)
        except KeyError:
            self._send_json(
                404,
                {
                    "error": f"no graph for week={week_num} network={network!r} cluster={cluster!r}",
                    "valid": {
                        "weeks": meta.get("weeks", []),
                        "networks": meta.get("networks", []),
                        "clusters": meta.get("clusters", []),
                    },
                },
            )

    def _handle_timeseries(self, query) -> None:
        topic = query.get("topic", [None])[0]
        if topic is None:
            self._send_artifact("timeseries/all.json")
            return
        try:
            self._send_artifact(f"timeseries/by_topic/{topic}.json")
        except KeyError:
            meta = self._meta_or_none() or {}
            self._send_json(
                404,
                {
                    "error": f"unknown topic {topic!r}",
                    "valid": {"topics": meta.get("topics", {})},
                },
            )

    def _handle_report(self, query) -> None:
        week = query.get("week", [None])[0]
        network = query.get("network", [None])[0]
        meta = self._meta_or_none() or {}
        try:
            week_num = int(week) if week is not None else None
        except ValueError:
            week_num = None
        if week_num is None or network is None:
            self._send_json(
                404,
                {
                    "error": "report needs week=<int>&network=<name>",
                    "valid": {
                        "weeks": meta.get("weeks", []),
                        "networks": meta.get("networks", []),
                    },
                },
            )
            return
        try:
            self._send_artifact(f"reports/{_week_key(week_num, network)}.json")
        except KeyError:
            self._send_json(
                404,
                {
                    "error": f"no report for week={week_num} network={network!r}",
                    "valid": {
                        "weeks": meta.get("weeks", []),
                        "networks": meta.get("networks", []),
                    },
                },
            )

    def _handle_static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json(404, {"error": f"no static file {rel!r}"})
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _send_artifact(self, rel: str) -> None:
        data = self.artifacts.read(rel)
        self.send_response(200)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _send_json(self, status: int, payload: dict) -> None:
        data = (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)


def make_server(
    run_dir: Path | str,
    host: str = "127.0.0.1",
    port: int = 8750,
    static_dir: Path | str | None = None,
) -> ThreadingHTTPServer:
    artifacts = ArtifactDirectory(run_dir)

    class BoundHandler(ApiHandler):
        pass

    BoundHandler.artifacts = artifacts
    BoundHandler.static_dir = Path(static_dir) if static_dir else None
    return ThreadingHTTPServer((host, port), BoundHandler)


def serve_forever(run_dir, host: str = "127.0.0.1", port: int = 8750, static_dir=None) -> None:
    server = make_server(run_dir, host, port, static_dir)
    actual_host, actual_port = server.server_address[:2]
    print(f"serving {run_dir} on http://{actual_host}:{actual_port}{API_PREFIX}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
