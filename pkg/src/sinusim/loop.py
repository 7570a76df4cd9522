"""Fixed-rate simulation core.

Runs the tick pipeline at the configured rate (1 kHz by default):
resample the newest pose, low-pass it, derive penetration and the
filtered indentation rate, evaluate the tissue model, pass the scaled
force through the controller, clamp to the device limit and emit one
record per tick. Simulation time is tick-driven; wall-clock pacing is
the bridge's concern, which keeps batch runs and replays deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import session as session_mod
from . import tissue
from .control import PassthroughController
from .scene import SceneConfig, classify_contacts, penetration_depth
from .session import SessionStatus, TaskSpec
from .tissue import FractureState, TissueParams

Vec3 = tuple[float, float, float]


class LoopAborted(RuntimeError):
    """Raised when a lossless sink fails mid-run; carries the last good tick."""

    def __init__(self, last_tick: int, cause: Exception):
        super().__init__(f"session aborted after tick {last_tick}: {cause}")
        self.last_tick = last_tick
        self.cause = cause


@dataclass(frozen=True)
class LoopConfig:
    tick_rate: float = 1000.0
    force_scale: float = 0.003       # N per model-force unit
    force_max: float = 3.3           # N, device limit
    velocity_filter_cutoff: float = 20.0  # Hz

    def __post_init__(self):
        if self.tick_rate <= 0:
            raise ValueError("tick_rate must be > 0")
        if self.force_scale <= 0 or self.force_max <= 0:
            raise ValueError("force_scale and force_max must be > 0")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


@dataclass(frozen=True)
class ToolState:
    position: Vec3
    raw_velocity: Vec3
    filtered_speed: float   # indentation rate along -floor normal, >= 0
    penetration: float


@dataclass(frozen=True)
class TickRecord:
    """One per-tick log row; the unit of the session log body."""

    tick: int
    t: float
    position: Vec3
    filtered_speed: float
    penetration: float
    model_force: float
    emitted_force: Vec3
    fractured: bool
    floor_contact: bool
    goal_hit: bool
    forbidden_hit: bool


class FirstOrderLowpass:
    """Discrete first-order low-pass, exact exponential smoothing."""

    def __init__(self, cutoff_hz: float, dt: float):
        self.alpha = 1.0 - math.exp(-2.0 * math.pi * cutoff_hz * dt)
        self._y: float | None = None

    def __call__(self, x: float) -> float:
        if self._y is None:
            self._y = x
        else:
            self._y += self.alpha * (x - self._y)
        return self._y


class Vec3Lowpass:
    def __init__(self, cutoff_hz: float, dt: float):
        self.alpha = 1.0 - math.exp(-2.0 * math.pi * cutoff_hz * dt)
        self._y: Vec3 | None = None

    def __call__(self, p: Vec3) -> Vec3:
        if self._y is None:
            self._y = p
        else:
            a = self.alpha
            y = self._y
            self._y = (y[0] + a * (p[0] - y[0]),
                       y[1] + a * (p[1] - y[1]),
                       y[2] + a * (p[2] - y[2]))
        return self._y


class ScriptedSource:
    """Pose source backed by a timed sample list; zero-order hold lookup."""

    def __init__(self, samples: list[tuple[float, Vec3]]):
        if not samples:
            raise ValueError("scripted source needs at least one sample")
        last = None
        for t, _ in samples:
            if last is not None and t <= last:
                raise ValueError("sample times must be strictly increasing")
            last = t
        self.samples = samples
        self._idx = 0

    def latest(self, t: float) -> Vec3:
        # Monotone queries; advance the cursor to the newest sample <= t.
        while (self._idx + 1 < len(self.samples)
               and self.samples[self._idx + 1][0] <= t):
            self._idx += 1
        return self.samples[self._idx][1]


def load_trajectory(path: str) -> ScriptedSource:
    """Read a `t x y z` whitespace-delimited trajectory file."""
    samples: list[tuple[float, Vec3]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 't x y z'")
            t, x, y, z = (float(p) for p in parts)
            samples.append((t, (x, y, z)))
    return ScriptedSource(samples)


def resample_input(samples: list[tuple[float, Vec3]], n_ticks: int,
                   cfg: LoopConfig) -> list[Vec3]:
    """Per-tick filtered positions from an asynchronous pose stream."""
    src = ScriptedSource(samples)
    filt = Vec3Lowpass(cfg.velocity_filter_cutoff, cfg.dt)
    return [filt(src.latest(k * cfg.dt)) for k in range(n_ticks)]


def clamp_and_scale_force(model_force: float, direction: Vec3,
                          cfg: LoopConfig) -> Vec3:
    """Map model units to a bounded force vector along the floor normal."""
    mag = min(cfg.force_scale * max(0.0, model_force), cfg.force_max)
    return (mag * direction[0], mag * direction[1], mag * direction[2])


class SimulationEngine:
    """Per-session pipeline state: filters, fracture latch, task status."""

    def __init__(self, scene: SceneConfig, params: TissueParams,
                 cfg: LoopConfig, spec: TaskSpec, controller=None):
        self.scene = scene
        self.params = params
        self.cfg = cfg
        self.spec = spec
        self.controller = controller or PassthroughController(cfg.force_max)
        self.fracture = FractureState()
        self.status = SessionStatus()
        self._pos_filter = Vec3Lowpass(cfg.velocity_filter_cutoff, cfg.dt)
        self._vel_filter = FirstOrderLowpass(cfg.velocity_filter_cutoff, cfg.dt)
        self._prev_pen: float | None = None

    def tick(self, k: int, raw_pose: Vec3) -> TickRecord:
        return self.tick_from_position(k, self._pos_filter(raw_pose))

    def tick_from_position(self, k: int, pos: Vec3) -> TickRecord:
        """Pipeline from the filtered position onward; replay entry point."""
        cfg = self.cfg
        pen = penetration_depth(pos, self.scene.floor)
        if self._prev_pen is None:
            diff = 0.0
        else:
            diff = (pen - self._prev_pen) / cfg.dt
        self._prev_pen = pen
        v_filtered = self._vel_filter(max(0.0, diff))
        # Retraction is evaluated on the static curve (v treated as 0).
        v_model = 0.0 if diff < 0.0 else v_filtered

        model_force, self.fracture = tissue.step(
            pen, v_model, self.fracture, self.params)

        stiffness = tissue.tangent_stiffness(pen, self.params)
        ref = min(cfg.force_scale * model_force, cfg.force_max)
        u = self.controller.command(ref, stiffness)
        mag = min(max(0.0, u), cfg.force_max)
        n = self.scene.floor.normal
        emitted = (mag * n[0], mag * n[1], mag * n[2])

        contacts = classify_contacts(pos, self.scene)
        if not self.status.terminated:
            self.status = session_mod.advance(
                self.status, contacts, self.fracture.fractured, k, self.spec)

        return TickRecord(
            tick=k,
            t=k * cfg.dt,
            position=pos,
            filtered_speed=v_model,
            penetration=pen,
            model_force=model_force,
            emitted_force=emitted,
            fractured=self.fracture.fractured,
            floor_contact=contacts.floor_contact,
            goal_hit=contacts.goal_hit,
            forbidden_hit=contacts.forbidden_hit,
        )


def run_loop(source, engine: SimulationEngine, duration: float,
             record_sink, telemetry_sinks=()) -> SessionStatus:
    """Run `duration * tick_rate` ticks, appending every record to the sink.

    Telemetry sinks are best effort and never abort the run; a failure
    of the lossless record sink aborts with a partial-log marker.
    """
    cfg = engine.cfg
    n_ticks = round(duration * cfg.tick_rate)
    dt = cfg.dt
    for k in range(n_ticks):
        rec = engine.tick(k, source.latest(k * dt))
        try:
            record_sink.append(rec)
        except Exception as exc:
            if hasattr(record_sink, "mark_partial"):
                record_sink.mark_partial(k)
            raise LoopAborted(k - 1, exc) from exc
        for sink in telemetry_sinks:
            try:
                sink.offer(rec)
            except Exception:
                pass  # lossy by contract
    return engine.status
