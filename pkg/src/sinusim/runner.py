"""Batch session orchestration: wire config + trajectory into one logged run."""

from __future__ import annotations

from .config import build_scene, build_tissue_params, sigma_for_level
from .loop import LoopConfig, ScriptedSource, SimulationEngine, run_loop
from .session import SessionStatus, TaskKind, TaskSpec
from .storage import FileRecordSink, SessionLog, make_header, read_log


def loop_config_from(cfg: dict) -> LoopConfig:
    loop = cfg["loop"]
    return LoopConfig(
        tick_rate=float(loop["tick_rate"]),
        force_scale=float(loop["force_scale"]),
        force_max=float(loop["force_max"]),
        velocity_filter_cutoff=float(loop["velocity_filter_cutoff"]),
    )


def make_task_spec(cfg: dict, kind: TaskKind, level: int, seed: int) -> TaskSpec:
    return TaskSpec(
        kind=kind,
        level=level,
        sigma=sigma_for_level(cfg, level),
        timeout=float(cfg["session"]["timeout"]),
        seed=seed,
        tick_rate=float(cfg["loop"]["tick_rate"]),
    )


def build_engine(cfg: dict, spec: TaskSpec) -> SimulationEngine:
    return SimulationEngine(
        scene=build_scene(cfg),
        params=build_tissue_params(cfg, sigma=spec.sigma),
        cfg=loop_config_from(cfg),
        spec=spec,
    )


def run_scripted_session(cfg: dict, spec: TaskSpec, source: ScriptedSource,
                         duration: float, out_path: str) -> SessionStatus:
    """Run one scripted session and write the full log to ``out_path``."""
    engine = build_engine(cfg, spec)
    sink = FileRecordSink(out_path, make_header(spec, cfg))
    try:
        status = run_loop(source, engine, duration, sink)
    except Exception:
        sink.close()
        raise
    sink.finalize(status)
    return status


def run_scripted_session_in_memory(cfg: dict, spec: TaskSpec,
                                   source: ScriptedSource,
                                   duration: float) -> SessionLog:
    class ListSink:
        def __init__(self):
            self.records = []

        def append(self, rec):
            self.records.append(rec)

    engine = build_engine(cfg, spec)
    sink = ListSink()
    status = run_loop(source, engine, duration, sink)
    return SessionLog(header=make_header(spec, cfg), records=sink.records,
                      status=status)
