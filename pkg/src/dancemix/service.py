"""HTTP/WebSocket control plane for one performance space.

Single live session at a time. Pose frames arrive over /ws/pose in the same
JSON schema replay files use; telemetry fans out over /ws/telemetry with a
bounded per-client queue (drop-oldest, and the next delivered event carries
gap=true so consumers can see they missed something). Library curation is
rejected while a session is running.
"""

from __future__ import annotations

import asyncio
import logging
import threading
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from . import library as libmod
from .engine import EngineConfig, LiveEngine, load_config, run_offline
from .errors import (
    ConfigError,
    DancemixError,
    IdCollisionError,
    InsufficientDataError,
    LibraryError,
    UnknownClipError,
)
from .neural import load_weight_bundle
from .pose import frame_from_json

log = logging.getLogger(__name__)

TELEMETRY_QUEUE_SIZE = 256
SCHEMA_VERSION = 1


class _TelemetryHub:
    """Fan-out of step events to WebSocket clients, tolerant of slow readers."""

    def __init__(self) -> None:
        self._queues: list[asyncio.Queue] = []
        self._gap_flags: dict[int, bool] = {}
        self._lock = threading.Lock()
        self.loop: asyncio.AbstractEventLoop | None = None

    def attach(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue(maxsize=TELEMETRY_QUEUE_SIZE)
        with self._lock:
            self._queues.append(q)
            self._gap_flags[id(q)] = False
        return q

    def detach(self, q: asyncio.Queue) -> None:
        with self._lock:
            if q in self._queues:
                self._queues.remove(q)
            self._gap_flags.pop(id(q), None)

    def consume_gap(self, q: asyncio.Queue) -> bool:
        with self._lock:
            flagged = self._gap_flags.get(id(q), False)
            self._gap_flags[id(q)] = False
        return flagged

    def publish(self, event: dict) -> None:
        """Called from the engine's decision thread."""
        if self.loop is None:
            return
        self.loop.call_soon_threadsafe(self._publish_on_loop, event)

    def _publish_on_loop(self, event: dict) -> None:
        with self._lock:
            queues = list(self._queues)
        for q in queues:
            try:
                q.put_nowait(event)
            except asyncio.QueueFull:
                try:
                    q.get_nowait()  # drop the oldest, mark the gap
                except asyncio.QueueEmpty:
                    pass
                with self._lock:
                    self._gap_flags[id(q)] = True
                q.put_nowait(event)


class ServiceState:
    def __init__(self, config: EngineConfig, run_dir: str | Path = "runs"):
        self.config = config
        self.run_dir = Path(run_dir)
        self.weights = load_weight_bundle(config.weights)
        self.library = libmod.load_library(config.library, weights=self.weights, verify_files=False)
        self.live: LiveEngine | None = None
        self.session_count = 0
        self.hub = _TelemetryHub()
        self.lock = threading.Lock()

    @property
    def state_name(self) -> str:
        return "running" if self.live is not None and self.live.running else "idle"


def _error_response(exc: Exception, status: int) -> JSONResponse:
    return JSONResponse({"error": str(exc), "kind": type(exc).__name__}, status_code=status)


def create_app(config: EngineConfig | None = None, run_dir: str | Path = "runs") -> FastAPI:
    if config is None:
        config = load_config(None)
    state = ServiceState(config, run_dir)
    app = FastAPI(title="dancemix engine")
    app.state.engine = state

    @app.on_event("startup")
    async def _bind_loop() -> None:
        state.hub.loop = asyncio.get_running_loop()

    @app.on_event("shutdown")
    async def _stop_session() -> None:
        with state.lock:
            if state.live is not None:
                state.live.stop()
                state.live = None

    # --- status and config -------------------------------------------------

    @app.get("/api/status")
    def status() -> dict:
        return {
            "state": state.state_name,
            "library_clips": len(state.library),
            "schema": SCHEMA_VERSION,
        }

    @app.get("/api/config")
    def get_config() -> dict:
        return state.config.to_json_dict()

    @app.put("/api/config")
    def put_config(body: dict):
        merged = state.config.to_json_dict()
        merged.update(body or {})
        try:
            new_config = EngineConfig.from_json_dict(merged)
        except ConfigError as exc:
            return _error_response(exc, 422)
        with state.lock:
            state.config = new_config
            if state.live is not None:
                # the decision loop reads config per tick, so the next
                # transition picks these values up
                state.live.config = new_config
                state.live.engine.config = new_config
        return new_config.to_json_dict()

    # --- session lifecycle ----------------------------------------------------

    @app.post("/api/session/start")
    def session_start(body: dict | None = None):
        with state.lock:
            if state.live is not None:
                return _error_response(DancemixError("a session is already running"), 409)
            state.session_count += 1
            out_dir = (body or {}).get("out_dir") or str(
                state.run_dir / f"live-{state.session_count:03d}"
            )
            live = LiveEngine(state.config, state.library, state.weights, out_dir=out_dir)
            live.subscribe(state.hub.publish)
            try:
                live.start()
            except DancemixError as exc:
                return _error_response(exc, 500)
            state.live = live
        return {"state": "running", "out_dir": out_dir}

    @app.post("/api/session/stop")
    def session_stop():
        with state.lock:
            if state.live is None:
                return _error_response(DancemixError("no session is running"), 409)
            log_path, wav_path = state.live.stop()
            steps = state.live.engine.state.step_index
            state.live = None
        return {
            "state": "idle",
            "log": str(log_path),
            "wav": None if wav_path is None else str(wav_path),
            "steps": steps,
        }

    # --- library -----------------------------------------------------------------

    @app.get("/api/library")
    def get_library() -> dict:
        return {
            "weights_sha256": state.library.weights_sha256,
            "clips": [entry.to_json() for entry in state.library.entries],
        }

    @app.post("/api/library/add")
    def library_add(body: dict):
        if state.state_name == "running":
            return _error_response(DancemixError("library is locked during a session"), 409)
        path = (body or {}).get("path")
        if not path:
            return _error_response(ConfigError("body must include 'path'"), 422)
        try:
            state.library = libmod.add_clip(
                state.library.root,
                path,
                state.weights,
                clip_id=(body or {}).get("id"),
                tags=(body or {}).get("tags"),
                gain_db=float((body or {}).get("gain_db", 0.0)),
            )
        except IdCollisionError as exc:
            return _error_response(exc, 409)
        except (LibraryError, DancemixError, OSError) as exc:
            return _error_response(exc, 400)
        return {"library_clips": len(state.library)}

    @app.delete("/api/library/{clip_id}")
    def library_remove(clip_id: str):
        if state.state_name == "running":
            return _error_response(DancemixError("library is locked during a session"), 409)
        try:
            libmod.remove_clip(state.library.root, clip_id)
        except UnknownClipError as exc:
            return _error_response(exc, 404)
        try:
            state.library = libmod.load_library(state.library.root, verify_files=False)
        except DancemixError as exc:
            # removing the last clip leaves the library empty; the engine
            # refuses to start on it but the service stays up to fix it
            return {"library_clips": 0, "warning": str(exc)}
        return {"library_clips": len(state.library)}

    # --- offline simulation -----------------------------------------------------

    @app.post("/api/simulate")
    def simulate(body: dict):
        pose = (body or {}).get("pose")
        out = (body or {}).get("out")
        if not pose or not out:
            return _error_response(ConfigError("body must include 'pose' and 'out'"), 422)
        if state.state_name == "running":
            return _error_response(DancemixError("cannot simulate during a live session"), 409)
        try:
            log_path, wav_path = run_offline(state.config, pose, out)
        except InsufficientDataError as exc:
            return _error_response(exc, 422)
        except DancemixError as exc:
            return _error_response(exc, 400)
        return {"log": str(log_path), "wav": str(wav_path)}

    # --- websockets -----------------------------------------------------------------

    @app.websocket("/ws/pose")
    async def ws_pose(ws: WebSocket) -> None:
        await ws.accept()
        try:
            while True:
                try:
                    payload = await ws.receive_json()
                except (ValueError, KeyError):
                    # invalid JSON text or a binary frame; the connection stays up
                    await ws.send_json({"error": "pose frames must be JSON text"})
                    continue
                try:
                    frame = frame_from_json(payload)
                except DancemixError as exc:
                    await ws.send_json({"error": str(exc)})
                    continue
                live = state.live
                if live is not None:
                    live.push_frame(frame)
        except WebSocketDisconnect:
            pass

    @app.websocket("/ws/telemetry")
    async def ws_telemetry(ws: WebSocket) -> None:
        await ws.accept()
        q = state.hub.attach()
        try:
            while True:
                event = await q.get()
                out = dict(event)
                out["schema"] = SCHEMA_VERSION
                out["gap"] = state.hub.consume_gap(q)
                await ws.send_json(out)
        except WebSocketDisconnect:
            pass
        finally:
            state.hub.detach(q)

    return app


def serve(config: EngineConfig, host: str = "127.0.0.1", run_dir: str | Path = "runs") -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    app = create_app(config, run_dir=run_dir)
    uvicorn.run(app, host=host, port=config.port, log_level="info")
