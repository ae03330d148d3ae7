"""Interactive session service: HTTP commands plus a WebSocket frame stream.

Lifecycle and commands are idempotent request/response calls; frames
produced while a command executes are broadcast one-way to WebSocket
subscribers, coalesced to at most 60 frames per second with the final
(quiescent) frame always delivered. Sessions are isolated and ephemeral:
export is the durability mechanism.

Every response carries the protocol version (v: 1) and the session
revision it reflects. Error bodies are {v, error, message, field?}.
"""

from __future__ import annotations

import asyncio
import copy
import logging
import threading
import time
import uuid
from collections import deque
from pathlib import Path
from typing import Any

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .actuation import WaypointMove
from .errors import ChainformError, NonConvergenceError, ScenarioError
from .metrics import shape_error
from .runner import SimRun
from .scenario import (
    FrameRecord,
    ScenarioFile,
    load_scenario,
    parse_scenario,
    split_global_id,
    trajectory_lines,
)

log = logging.getLogger("chainform.service")

PROTOCOL_VERSION = 1
FRAME_INTERVAL_S = 1.0 / 60.0
DEFAULT_UNDO_DEPTH = 64


def frame_to_json(rec: FrameRecord) -> dict:
    return {
        "frame": rec.frame,
        "driven": rec.driven,
        "points": [[p.x, p.y] for p in rec.points],
        "elongations": [e for e in rec.elongations],
    }


class Session:
    """One isolated simulation session; commands are serialized by a lock."""

    def __init__(self, scenario: ScenarioFile, undo_depth: int = DEFAULT_UNDO_DEPTH):
        self.session_id = uuid.uuid4().hex
        self.lock = threading.Lock()
        self.revision = 0
        self.history: deque = deque(maxlen=undo_depth)
        self.subscribers: set[asyncio.Queue] = set()
        self.loop: asyncio.AbstractEventLoop | None = None
        self._last_broadcast = 0.0
        self._pending: FrameRecord | None = None
        self.run = SimRun(scenario, on_frame=self._on_frame)

    # -- streaming -----------------------------------------------------------

    def _on_frame(self, rec: FrameRecord) -> None:
        self.revision += 1
        now = time.monotonic()
        if now - self._last_broadcast >= FRAME_INTERVAL_S:
            self._broadcast(rec)
        else:
            self._pending = rec

    def _broadcast(self, rec: FrameRecord) -> None:
        self._last_broadcast = time.monotonic()
        self._pending = None
        if not self.subscribers or self.loop is None:
            return
        msg = {"v": PROTOCOL_VERSION, "revision": self.revision, "frame": frame_to_json(rec)}
        for queue in list(self.subscribers):
            self.loop.call_soon_threadsafe(queue.put_nowait, msg)

    def flush_stream(self) -> None:
        """Deliver the most recent coalesced frame, if one was skipped."""
        if self._pending is not None:
            self._broadcast(self._pending)

    # -- command helpers -----------------------------------------------------

    def snapshot(self) -> None:
        self.history.append((
            [c.copy() for c in self.run.chains],
            len(self.run.frames),
            copy.deepcopy(self.run.episodes),
        ))

    def undo(self) -> bool:
        if not self.history:
            return False
        chains, n_frames, episodes = self.history.pop()
        self.run.chains = chains
        del self.run.frames[n_frames:]
        self.run.episodes = episodes
        self.revision += 1
        self._broadcast(self.run.frames[-1])
        return True

    def state_payload(self) -> dict:
        rec = self.run.frames[-1]
        return {
            "v": PROTOCOL_VERSION,
            "session_id": self.session_id,
            "revision": self.revision,
            "scenario": self.run.scenario.name,
            "chain_sizes": list(self.run.sizes),
            "rest_length_um": self.run.scenario.solver.rest_length,
            "threshold": self.run.scenario.solver.threshold,
            "frame": frame_to_json(rec),
        }


def _error(status: int, code: str, message: str, field: str | None = None) -> JSONResponse:
    body: dict[str, Any] = {"v": PROTOCOL_VERSION, "error": code, "message": message}
    if field:
        body["field"] = field
    return JSONResponse(status_code=status, content=body)


def _require_number(body: dict, key: str, positive: bool = False) -> float:
    v = body.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError("expected a number", field=key)
    if positive and v <= 0:
        raise ScenarioError("must be positive", field=key)
    return float(v)


def create_app(scenario_dir: Path | None = None, undo_depth: int = DEFAULT_UNDO_DEPTH) -> FastAPI:
    app = FastAPI(title="chainform session service", version="1")
    # The studio is served as a static page from another origin.
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()

    def get_session(session_id: str) -> Session | None:
        with sessions_lock:
            return sessions.get(session_id)

    def resolve(spec: Any) -> ScenarioFile:
        if isinstance(spec, dict):
            return parse_scenario(spec, source="<request>")
        if isinstance(spec, str):
            name = spec.removesuffix(".json")
            if scenario_dir is not None:
                path = scenario_dir / f"{name}.json"
                if path.exists():
                    return load_scenario(path)
            from .cli import bundled_scenario_path

            bundled = bundled_scenario_path(name)
            if bundled.exists():
                return load_scenario(bundled)
            raise ScenarioError(f"unknown scenario {spec!r}", field="scenario")
        raise ScenarioError("scenario must be a name or an inline document",
                            field="scenario")

    @app.get("/v1/scenarios")
    def list_scenarios():
        names = set()
        if scenario_dir is not None and scenario_dir.is_dir():
            names.update(p.stem for p in scenario_dir.glob("*.json"))
        from .cli import bundled_scenario_names

        names.update(bundled_scenario_names())
        return {"v": PROTOCOL_VERSION, "scenarios": sorted(names)}

    @app.get("/v1/scenarios/{name}")
    def get_scenario(name: str):
        from .scenario import scenario_to_doc

        try:
            scenario = resolve(name)
        except ScenarioError as exc:
            return _error(404, "unknown_scenario", str(exc), exc.field)
        return {"v": PROTOCOL_VERSION, "scenario": scenario_to_doc(scenario)}

    @app.post("/v1/session")
    async def create_session(body: dict):
        if "scenario" not in body:
            return _error(400, "missing_field", "scenario is required", "scenario")
        try:
            scenario = resolve(body["scenario"])
            session = Session(scenario, undo_depth=undo_depth)
        except ScenarioError as exc:
            return _error(400, "invalid_scenario", str(exc), exc.field)
        except ChainformError as exc:
            return _error(400, "invalid_scenario", str(exc))
        session.loop = asyncio.get_running_loop()
        with sessions_lock:
            sessions[session.session_id] = session
        return session.state_payload()

    @app.get("/v1/session/{session_id}/state")
    def get_state(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with session.lock:
            return session.state_payload()

    @app.post("/v1/session/{session_id}/drag")
    def drag(session_id: str, body: dict):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        target = body.get("target")
        if not isinstance(target, dict) or "x" not in target or "y" not in target:
            return _error(400, "invalid_target", "target must be {x, y}", "target")
        try:
            point_id = body.get("point_id")
            if isinstance(point_id, bool) or not isinstance(point_id, int):
                raise ScenarioError("expected an integer", field="point_id")
            tx = _require_number(target, "x")
            ty = _require_number(target, "y")
            step = _require_number(body, "step_um", positive=True)
        except ScenarioError as exc:
            return _error(400, "invalid_request", str(exc), exc.field)

        with session.lock:
            run = session.run
            total = sum(run.sizes)
            if not (0 <= point_id < total):
                return _error(400, "invalid_point",
                              f"point_id {point_id} out of range 0..{total - 1}", "point_id")
            ci, local = split_global_id(run.sizes, point_id)
            move = WaypointMove(point_id=local, waypoints=((tx, ty),), step_size=step)
            session.snapshot()
            try:
                episode = run.execute_move(ci, move, settle=True)
            except NonConvergenceError as exc:
                return _error(409, "non_convergence", str(exc))
            session.flush_stream()
            metrics = run.metrics_report()
            return {
                "v": PROTOCOL_VERSION,
                "revision": session.revision,
                "quiescent": True,
                "frames": episode.drive_frames,
                "settle_sweeps": episode.settle_sweeps,
                "metrics": metrics,
                "frame": frame_to_json(run.frames[-1]),
            }

    @app.post("/v1/session/{session_id}/step")
    def step(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with session.lock:
            session.snapshot()
            rec = session.run.step()
            session.flush_stream()
            return {"v": PROTOCOL_VERSION, "revision": session.revision,
                    "frame": frame_to_json(rec)}

    @app.post("/v1/session/{session_id}/undo")
    def undo(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with session.lock:
            if not session.undo():
                return _error(409, "nothing_to_undo", "history is empty")
            return session.state_payload()

    @app.post("/v1/session/{session_id}/score")
    def score(session_id: str, body: dict):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        target = body.get("target_polyline")
        if (not isinstance(target, list) or len(target) < 2
                or any(not isinstance(p, list) or len(p) != 2 for p in target)):
            return _error(400, "invalid_target",
                          "target_polyline must be a list of [x, y]", "target_polyline")
        with session.lock:
            err = shape_error(session.run._merged_chain(), target)
            return {"v": PROTOCOL_VERSION, "revision": session.revision,
                    "rms_um": err.rms, "hausdorff_um": err.hausdorff}

    @app.get("/v1/session/{session_id}/export")
    def export(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        with session.lock:
            text = "\n".join(trajectory_lines(session.run.frames)) + "\n"
        return PlainTextResponse(text, media_type="text/csv")

    @app.websocket("/v1/session/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        session = get_session(session_id)
        if session is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        session.loop = asyncio.get_running_loop()
        session.subscribers.add(queue)
        try:
            await websocket.send_json({
                "v": PROTOCOL_VERSION,
                "revision": session.revision,
                "frame": frame_to_json(session.run.frames[-1]),
            })
            while True:
                msg = await queue.get()
                await websocket.send_json(msg)
        except WebSocketDisconnect:
            pass
        finally:
            session.subscribers.discard(queue)

    return app
