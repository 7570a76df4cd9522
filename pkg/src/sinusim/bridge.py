"""Live wire-protocol endpoint.

A single websocket endpoint carries JSON text messages (schema in
docs/protocol.md): pose input from one steering client, state-frame
telemetry to any number of observers, task control and questionnaire
submissions. The simulation loop runs on its own thread, paced to the
configured tick rate; pose input lands in a single latest-wins slot and
telemetry goes through bounded per-client buffers that drop the oldest
frame, so a stalled client can never hold up a tick.
"""

from __future__ import annotations

import asyncio
import collections
import json
import math
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import DEFAULTS
from .runner import build_engine, make_task_spec
from .session import TaskKind, assign_level
from .storage import make_header

PROTOCOL_VERSION = 1
FRAME_RATE = 60.0  # Hz, state-frame decimation target
KINDS = ("pose_in", "state_frame", "task_control", "questionnaire", "error")


class WireError(ValueError):
    """Malformed or invalid wire message."""


class WireVersionError(WireError):
    pass


@dataclass(frozen=True)
class PoseIn:
    t: float
    position: tuple[float, float, float]
    kind: str = "pose_in"


@dataclass(frozen=True)
class StateFrame:
    tick: int
    position: tuple[float, float, float]
    force: tuple[float, float, float]
    fracture: bool
    floor_contact: bool
    goal_hit: bool
    forbidden_hit: bool
    phase: str
    scene_id: str
    outcome: str | None = None
    kind: str = "state_frame"


@dataclass(frozen=True)
class TaskControl:
    action: str  # "start" | "abort"
    task_kind: str = "evaluation"
    level: int | None = None
    seed: int = 0
    kind: str = "task_control"


@dataclass(frozen=True)
class Questionnaire:
    item: str
    score: float | None = None
    text: str = ""
    kind: str = "questionnaire"


@dataclass(frozen=True)
class ErrorMessage:
    message: str
    kind: str = "error"


def encode(msg) -> str:
    payload = {"v": PROTOCOL_VERSION, "kind": msg.kind}
    if isinstance(msg, PoseIn):
        payload.update(t=msg.t, position=list(msg.position))
    elif isinstance(msg, StateFrame):
        payload.update(tick=msg.tick, position=list(msg.position),
                       force=list(msg.force), fracture=msg.fracture,
                       contacts={"floor": msg.floor_contact,
                                 "goal": msg.goal_hit,
                                 "forbidden": msg.forbidden_hit},
                       phase=msg.phase, scene_id=msg.scene_id,
                       outcome=msg.outcome)
    elif isinstance(msg, TaskControl):
        payload.update(action=msg.action,
                       task={"kind": msg.task_kind, "level": msg.level,
                             "seed": msg.seed})
    elif isinstance(msg, Questionnaire):
        payload.update(item=msg.item, score=msg.score, text=msg.text)
    elif isinstance(msg, ErrorMessage):
        payload.update(message=msg.message)
    else:
        raise WireError(f"unknown message object {type(msg)}")
    return json.dumps(payload, separators=(",", ":"))


def _vec3(raw) -> tuple[float, float, float]:
    if not isinstance(raw, list) or len(raw) != 3:
        raise WireError(f"expected 3-vector, got {raw!r}")
    return (float(raw[0]), float(raw[1]), float(raw[2]))


def decode(text: str):
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WireError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise WireError("message must be an object")
    version = payload.get("v")
    if version != PROTOCOL_VERSION:
        raise WireVersionError(f"unsupported protocol version {version!r}")
    kind = payload.get("kind")
    try:
        if kind == "pose_in":
            return PoseIn(t=float(payload["t"]),
                          position=_vec3(payload["position"]))
        if kind == "state_frame":
            c = payload["contacts"]
            return StateFrame(
                tick=int(payload["tick"]),
                position=_vec3(payload["position"]),
                force=_vec3(payload["force"]),
                fracture=bool(payload["fracture"]),
                floor_contact=bool(c["floor"]),
                goal_hit=bool(c["goal"]),
                forbidden_hit=bool(c["forbidden"]),
                phase=str(payload["phase"]),
                scene_id=str(payload["scene_id"]),
                outcome=payload.get("outcome"),
            )
        if kind == "task_control":
            task = payload["task"]
            action = payload["action"]
            if action not in ("start", "abort"):
                raise WireError(f"bad task action {action!r}")
            level = task.get("level")
            return TaskControl(action=action,
                               task_kind=str(task.get("kind", "evaluation")),
                               level=None if level is None else int(level),
                               seed=int(task.get("seed", 0)))
        if kind == "questionnaire":
            score = payload.get("score")
            if score is not None:
                score = float(score)
                if not 0.0 <= score <= 10.0:
                    raise WireError(f"score out of range [0, 10]: {score}")
            return Questionnaire(item=str(payload["item"]), score=score,
                                 text=str(payload.get("text", "")))
        if kind == "error":
            return ErrorMessage(message=str(payload["message"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, WireError):
            raise
        raise WireError(f"malformed {kind} payload: {exc}") from exc
    raise WireError(f"unknown message kind {kind!r}")


class LiveSession:
    """Simulation loop on a thread, fed by a latest-wins pose slot."""

    def __init__(self, cfg: dict, control: TaskControl,
                 realtime: bool = True):
        level = (control.level if control.level is not None
                 else assign_level(control.seed))
        self.spec = make_task_spec(cfg, TaskKind(control.task_kind), level,
                                   control.seed)
        self.engine = build_engine(cfg, self.spec)
        self.header = make_header(self.spec, cfg)
        self.realtime = realtime
        self.records: list = []
        self._pose: tuple[float, float, float] | None = None
        self._stop = threading.Event()
        self._subscribers: list[collections.deque] = []
        self._sub_lock = threading.Lock()
        self._frames_sent = 0
        self._thread = threading.Thread(target=self._run, daemon=True)

    # -- loop side ---------------------------------------------------------

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)

    def submit_pose(self, pose: PoseIn) -> None:
        self._pose = pose.position  # single-reference write, latest wins

    def subscribe(self, maxlen: int = 8) -> collections.deque:
        q: collections.deque = collections.deque(maxlen=maxlen)
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _frame_due(self, tick: int) -> bool:
        # Deterministic 60 Hz decimation of the 1 kHz tick stream.
        rate = self.engine.cfg.tick_rate
        return int(tick * FRAME_RATE / rate) != int((tick - 1) * FRAME_RATE
                                                    / rate) or tick == 0

    def _run(self) -> None:
        dt = self.engine.cfg.dt
        start = time.perf_counter()
        k = 0
        idle_pose = tuple(
            f + 10.0 * n for f, n in zip(self.engine.scene.floor.center,
                                         self.engine.scene.floor.normal))
        while not self._stop.is_set():
            if self.realtime:
                target = start + k * dt
                delay = target - time.perf_counter()
                if delay > 0:
                    time.sleep(delay)
            pose = self._pose if self._pose is not None else idle_pose
            rec = self.engine.tick(k, pose)
            self.records.append(rec)
            if self._frame_due(k) or self.engine.status.terminated:
                frame = self._make_frame(rec)
                with self._sub_lock:
                    for q in self._subscribers:
                        q.append(frame)  # bounded; oldest frame dropped
            if self.engine.status.terminated:
                break
            k += 1

    def _make_frame(self, rec) -> StateFrame:
        status = self.engine.status
        outcome = None
        if status.terminated:
            from .session import classify_outcome
            outcome = classify_outcome(status).value
        return StateFrame(
            tick=rec.tick, position=rec.position, force=rec.emitted_force,
            fracture=rec.fractured, floor_contact=rec.floor_contact,
            goal_hit=rec.goal_hit, forbidden_hit=rec.forbidden_hit,
            phase=status.phase.value, scene_id="default", outcome=outcome)


class Hub:
    """Connection bookkeeping shared by all websocket handlers."""

    def __init__(self, cfg: dict, realtime: bool = True,
                 questionnaire_path: str | None = None):
        self.cfg = cfg
        self.realtime = realtime
        self.session: LiveSession | None = None
        self.steering_busy = False
        self.questionnaire_path = questionnaire_path
        self._lock = threading.Lock()

    def start_session(self, control: TaskControl) -> LiveSession:
        with self._lock:
            if self.session is not None:
                self.session.stop()
            self.session = LiveSession(self.cfg, control,
                                       realtime=self.realtime)
            self.session.start()
            return self.session

    def abort_session(self) -> None:
        with self._lock:
            if self.session is not None:
                self.session.stop()
                self.session = None

    def record_questionnaire(self, msg: Questionnaire) -> None:
        if self.questionnaire_path:
            line = json.dumps({"item": msg.item, "score": msg.score,
                               "text": msg.text})
            with self._lock:
                with open(self.questionnaire_path, "a",
                          encoding="utf-8") as fh:
                    fh.write(line + "\n")


def create_app(cfg: dict | None = None, realtime: bool = True,
               questionnaire_path: str | None = None) -> FastAPI:
    cfg = cfg if cfg is not None else DEFAULTS
    app = FastAPI()
    hub = Hub(cfg, realtime=realtime, questionnaire_path=questionnaire_path)
    app.state.hub = hub

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        role = ws.query_params.get("role", "steer")
        await ws.accept()
        if role == "steer":
            if hub.steering_busy:
                await ws.send_text(encode(ErrorMessage(
                    "steering slot occupied; connect as role=observe")))
                await ws.close()
                return
            hub.steering_busy = True
        queue = None
        recv_task: asyncio.Task | None = None
        try:
            while True:
                # Drain pending telemetry, then poll for client input. A
                # persistent receive task avoids dropping messages on the
                # poll timeout.
                if queue is None and hub.session is not None:
                    queue = hub.session.subscribe()
                if queue:
                    while queue:
                        await ws.send_text(encode(queue.popleft()))
                if recv_task is None:
                    recv_task = asyncio.ensure_future(ws.receive_text())
                done, _ = await asyncio.wait({recv_task}, timeout=0.005)
                if not done:
                    continue
                text = recv_task.result()
                recv_task = None
                try:
                    msg = decode(text)
                except WireError as exc:
                    await ws.send_text(encode(ErrorMessage(str(exc))))
                    continue
                if isinstance(msg, PoseIn):
                    if role == "steer" and hub.session is not None:
                        hub.session.submit_pose(msg)
                elif isinstance(msg, TaskControl):
                    if msg.action == "start":
                        session = hub.start_session(msg)
                        queue = session.subscribe()
                    else:
                        hub.abort_session()
                        queue = None
                elif isinstance(msg, Questionnaire):
                    hub.record_questionnaire(msg)
                else:
                    await ws.send_text(encode(ErrorMessage(
                        f"unexpected message kind {msg.kind!r}")))
        except WebSocketDisconnect:
            pass
        finally:
            if recv_task is not None:
                recv_task.cancel()
            if role == "steer":
                hub.steering_busy = False
            if queue is not None and hub.session is not None:
                hub.session.unsubscribe(queue)

    return app
