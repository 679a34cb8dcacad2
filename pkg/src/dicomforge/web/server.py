"""In-memory stub image-management server for end-to-end tests and demos.

Serves the three endpoint families the client speaks (store, retrieve,
search) over HTTP/1.1. Instances are keyed by (study, series, sop);
re-storing a key replaces the previous bytes (last writer wins). State is
in-memory; an optional snapshot directory persists stored files for CLI
demos and reloads them on startup.
"""
from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qsl, urlparse

from ..dataset import DataSet
from ..errors import DicomforgeError, ServerStartupError
from ..part10 import read_part10
from ..tags import resolve_key
from .jsonmodel import dataset_to_json
from .multipart import (
    boundary_from_content_type,
    build_multipart,
    content_type_header,
    parse_multipart,
    random_boundary,
)

_FILTER_KEYS = {"Modality", "PatientID", "SOPInstanceUID",
                "StudyInstanceUID", "SeriesInstanceUID"}

_STUDY_ATTRS = ("StudyInstanceUID", "PatientID", "PatientName", "StudyDate",
                "AccessionNumber")
_SERIES_ATTRS = _STUDY_ATTRS + ("SeriesInstanceUID", "Modality", "SeriesNumber")
_INSTANCE_ATTRS = _SERIES_ATTRS + ("SOPClassUID", "SOPInstanceUID",
                                   "InstanceNumber")


class _StoredInstance:
    __slots__ = ("blob", "meta")

    def __init__(self, blob: bytes, meta: DataSet):
        self.blob = blob
        self.meta = meta


def _meta_subset(ds: DataSet, keys) -> DataSet:
    subset = DataSet()
    for key in keys:
        element = ds.element(key)
        if element is not None:
            subset.add(element)
    return subset


class StubArchive:
    """Lifecycle handle around the threaded HTTP server."""

    def __init__(self, port: int = 0, snapshot_dir=None):
        self._requested_port = port
        self._snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        self._lock = threading.Lock()
        self._instances: dict[tuple[str, str, str], _StoredInstance] = {}
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- storage ------------------------------------------------------------

    def put(self, blob: bytes) -> tuple[str, str, str]:
        _, ds = read_part10(blob)
        study = ds.value("StudyInstanceUID")
        series = ds.value("SeriesInstanceUID")
        sop = ds.value("SOPInstanceUID")
        if not (study and series and sop):
            raise DicomforgeError("instance lacks study/series/sop UIDs")
        key = (study, series, sop)
        meta = _meta_subset(ds, _INSTANCE_ATTRS)
        with self._lock:
            self._instances[key] = _StoredInstance(blob, meta)
        if self._snapshot_dir:
            self._snapshot_dir.mkdir(parents=True, exist_ok=True)
            (self._snapshot_dir / f"{sop}.dcm").write_bytes(blob)
        return key

    def get(self, study: str, series: str, sop: str) -> bytes | None:
        with self._lock:
            entry = self._instances.get((study, series, sop))
        return entry.blob if entry else None

    def records(self) -> list[tuple[tuple[str, str, str], DataSet]]:
        with self._lock:
            return [(key, entry.meta) for key, entry in self._instances.items()]

    def __len__(self) -> int:
        with self._lock:
            return len(self._instances)

    def _load_snapshot(self) -> None:
        if not self._snapshot_dir or not self._snapshot_dir.is_dir():
            return
        for path in sorted(self._snapshot_dir.glob("*.dcm")):
            try:
                self.put(path.read_bytes())
            except DicomforgeError:
                continue

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> "StubArchive":
        self._load_snapshot()
        archive = self
        handler = type("_Handler", (_RequestHandler,), {"archive": archive})
        try:
            self._server = ThreadingHTTPServer(
                ("127.0.0.1", self._requested_port), handler
            )
        except OSError as exc:
            raise ServerStartupError(
                f"cannot bind port {self._requested_port}: {exc}"
            ) from exc
        self._thread = threading.Thread(
            target=self._server.serve_forever,
            kwargs={"poll_interval": 0.05},
            daemon=True,
        )
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    @property
    def port(self) -> int:
        if self._server is None:
            raise RuntimeError("server is not running")
        return self._server.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def __enter__(self) -> "StubArchive":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def stub_serve(port: int = 0, snapshot_dir=None) -> StubArchive:
    """Start a stub archive; returns the running handle (stop() to end)."""
    return StubArchive(port=port, snapshot_dir=snapshot_dir).start()


class _RequestHandler(BaseHTTPRequestHandler):
    archive: StubArchive  # injected by StubArchive.start
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):  # tests do not want request logging
        pass

    def _reply(self, status: int, body: bytes = b"",
               content_type: str = "application/dicom+json") -> None:
        self.send_response(status)
        if body:
            self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _reply_json(self, status: int, payload) -> None:
        self._reply(status, json.dumps(payload).encode("utf-8"))

    # -- STOW ----------------------------------------------------------------

    def do_POST(self):
        path = urlparse(self.path).path.rstrip("/")
        if not (path == "/studies" or
                (path.startswith("/studies/") and path.count("/") == 2)):
            self._reply(404)
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        try:
            boundary = boundary_from_content_type(
                self.headers.get("Content-Type", "")
            )
            parts = parse_multipart(body, boundary)
        except DicomforgeError as exc:
            self._reply_json(400, {"error": str(exc)})
            return
        referenced = []
        failed = []
        for _, blob in parts:
            try:
                study, series, sop = self.archive.put(blob)
            except DicomforgeError:
                item = DataSet()
                item.put("FailureReason", 272)
                failed.append(item)
                continue
            _, ds = read_part10(blob)
            item = DataSet()
            item.put("ReferencedSOPClassUID", ds.value("SOPClassUID", ""))
            item.put("ReferencedSOPInstanceUID", sop)
            item.put(
                "RetrieveURL",
                f"/studies/{study}/series/{series}/instances/{sop}",
            )
            referenced.append(item)
        response = DataSet()
        if failed:
            response.put("FailedSOPSequence", tuple(failed))
        if referenced:
            response.put("ReferencedSOPSequence", tuple(referenced))
        if failed and referenced:
            status = 202
        elif failed:
            status = 409
        else:
            status = 200
        self._reply_json(status, dataset_to_json(response))

    # -- WADO / QIDO -----------------------------------------------------------

    def do_GET(self):
        parsed = urlparse(self.path)
        segments = [s for s in parsed.path.split("/") if s]
        if (len(segments) == 6 and segments[0] == "studies"
                and segments[2] == "series" and segments[4] == "instances"):
            self._retrieve(segments[1], segments[3], segments[5])
            return
        if len(segments) == 1 and segments[0] in ("studies", "series", "instances"):
            self._search(segments[0], dict(parse_qsl(parsed.query)))
            return
        self._reply(404)

    def _retrieve(self, study: str, series: str, sop: str) -> None:
        blob = self.archive.get(study, series, sop)
        if blob is None:
            self._reply(404)
            return
        boundary = random_boundary()
        body = build_multipart([blob], boundary)
        self._reply(200, body, content_type=content_type_header(boundary))

    def _search(self, level: str, params: dict[str, str]) -> None:
        try:
            limit = int(params.pop("limit", -1))
            offset = int(params.pop("offset", 0))
        except ValueError:
            self._reply_json(400, {"error": "limit/offset must be integers"})
            return
        filters = {}
        for key, value in params.items():
            try:
                tag = resolve_key(key)
            except (KeyError, TypeError):
                self._reply_json(400, {"error": f"unknown attribute {key!r}"})
                return
            filters[tag] = value
        known = {resolve_key(k) for k in _FILTER_KEYS}
        if not set(filters) <= known:
            self._reply_json(400, {"error": "unsupported search attribute"})
            return

        records = []
        seen = set()
        for (study, series, sop), meta in self.archive.records():
            if any(meta.value(tag, "") != value for tag, value in filters.items()):
                continue
            if level == "studies":
                dedup_key, attrs = study, _STUDY_ATTRS
            elif level == "series":
                dedup_key, attrs = (study, series), _SERIES_ATTRS
            else:
                dedup_key, attrs = (study, series, sop), _INSTANCE_ATTRS
            if dedup_key in seen:
                continue
            seen.add(dedup_key)
            records.append(_meta_subset(meta, attrs))

        records = records[offset:]
        if limit >= 0:
            records = records[:limit]
        if not records:
            self._reply(204)
            return
        self._reply_json(200, [dataset_to_json(r) for r in records])
