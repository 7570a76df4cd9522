"""Session log persistence and bit-exact replay.

Log layout (text, streamable at 1 kHz, diffable):

    #SINUSLOG v1
    #HEADER {json: task, config, config_hash, seed}
    <one record per line: tick t px py pz speed pen f_model fx fy fz frac floor goal forbidden>
    #END {json terminal status}

Floats are written with ``repr``, Python's shortest round-trip encoding,
so reading back reproduces every bit. A missing #END or an unparseable
trailing line surfaces as a partial log carrying the valid prefix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .config import build_scene, build_tissue_params, config_hash
from .loop import LoopConfig, SimulationEngine, TickRecord
from .session import Phase, SessionStatus, TaskKind, TaskSpec

FORMAT_MAGIC = "#SINUSLOG"
FORMAT_VERSION = 1


class LogError(ValueError):
    """Base class for session log format errors."""


class LogVersionError(LogError):
    pass


class PartialLogError(LogError):
    """Truncated log; the recoverable prefix is attached."""

    def __init__(self, msg: str, last_valid_tick: int, partial: "SessionLog"):
        super().__init__(msg)
        self.last_valid_tick = last_valid_tick
        self.partial = partial


class ReplayRefusedError(LogError):
    """Header configs missing or hash mismatch; replay cannot be trusted."""


class ReplayDivergence(LogError):
    def __init__(self, tick: int, field_name: str, logged, recomputed):
        super().__init__(
            f"replay diverged at tick {tick}: {field_name} "
            f"logged={logged!r} recomputed={recomputed!r}")
        self.tick = tick
        self.field_name = field_name


@dataclass
class SessionLog:
    header: dict
    records: list
    status: SessionStatus | None = None

    @property
    def task_spec(self) -> TaskSpec:
        t = self.header["task"]
        return TaskSpec(kind=TaskKind(t["kind"]), level=int(t["level"]),
                        sigma=float(t["sigma"]), timeout=float(t["timeout"]),
                        seed=int(t["seed"]), tick_rate=float(t["tick_rate"]))


def task_to_dict(spec: TaskSpec) -> dict:
    return {"kind": spec.kind.value, "level": spec.level, "sigma": spec.sigma,
            "timeout": spec.timeout, "seed": spec.seed,
            "tick_rate": spec.tick_rate}


def make_header(spec: TaskSpec, config: dict) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "task": task_to_dict(spec),
        "config": config,
        "config_hash": config_hash(config),
    }


def _status_to_dict(status: SessionStatus) -> dict:
    return {
        "phase": status.phase.value,
        "contact_start_tick": status.contact_start_tick,
        "end_tick": status.end_tick,
        "forbidden_hits": status.forbidden_hits,
        "goal_reached": status.goal_reached,
        "fractured": status.fractured,
    }


def _status_from_dict(d: dict) -> SessionStatus:
    return SessionStatus(
        phase=Phase(d["phase"]),
        contact_start_tick=d["contact_start_tick"],
        end_tick=d["end_tick"],
        forbidden_hits=d["forbidden_hits"],
        goal_reached=d["goal_reached"],
        fractured=d["fractured"],
    )


def format_record(r: TickRecord) -> str:
    p, f = r.position, r.emitted_force
    return (f"{r.tick} {r.t!r} {p[0]!r} {p[1]!r} {p[2]!r} "
            f"{r.filtered_speed!r} {r.penetration!r} {r.model_force!r} "
            f"{f[0]!r} {f[1]!r} {f[2]!r} "
            f"{int(r.fractured)} {int(r.floor_contact)} {int(r.goal_hit)} "
            f"{int(r.forbidden_hit)}")


def parse_record(line: str) -> TickRecord:
    parts = line.split()
    if len(parts) != 15:
        raise LogError(f"malformed record ({len(parts)} fields)")
    return TickRecord(
        tick=int(parts[0]),
        t=float(parts[1]),
        position=(float(parts[2]), float(parts[3]), float(parts[4])),
        filtered_speed=float(parts[5]),
        penetration=float(parts[6]),
        model_force=float(parts[7]),
        emitted_force=(float(parts[8]), float(parts[9]), float(parts[10])),
        fractured=bool(int(parts[11])),
        floor_contact=bool(int(parts[12])),
        goal_hit=bool(int(parts[13])),
        forbidden_hit=bool(int(parts[14])),
    )


class FileRecordSink:
    """Lossless streaming writer used by the loop; single owner."""

    def __init__(self, path: str, header: dict):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._fh.write(f"{FORMAT_MAGIC} v{FORMAT_VERSION}\n")
        self._fh.write("#HEADER " + json.dumps(header, sort_keys=True) + "\n")

    def append(self, record: TickRecord) -> None:
        self._fh.write(format_record(record) + "\n")

    def mark_partial(self, tick: int) -> None:
        try:
            self._fh.write(f"#PARTIAL {tick}\n")
            self._fh.close()
        except Exception:
            pass

    def finalize(self, status: SessionStatus) -> None:
        self._fh.write("#END " + json.dumps(_status_to_dict(status),
                                            sort_keys=True) + "\n")
        self._fh.close()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()


def write_log(path: str, log: SessionLog) -> None:
    sink = FileRecordSink(path, log.header)
    for rec in log.records:
        sink.append(rec)
    if log.status is not None:
        sink.finalize(log.status)
    else:
        sink.close()


def read_log(path: str) -> SessionLog:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(FORMAT_MAGIC):
        raise LogError(f"{path}: not a session log")
    version = lines[0][len(FORMAT_MAGIC):].strip()
    if version != f"v{FORMAT_VERSION}":
        raise LogVersionError(f"{path}: unsupported version {version!r}")
    if len(lines) < 2 or not lines[1].startswith("#HEADER "):
        raise LogError(f"{path}: missing header")
    try:
        header = json.loads(lines[1][len("#HEADER "):])
    except json.JSONDecodeError as exc:
        raise LogError(f"{path}: unreadable header: {exc}") from exc

    records: list[TickRecord] = []
    status: SessionStatus | None = None
    partial_reason: str | None = None
    for line in lines[2:]:
        if line.startswith("#END "):
            status = _status_from_dict(json.loads(line[len("#END "):]))
            break
        if line.startswith("#PARTIAL"):
            partial_reason = "writer aborted mid-session"
            break
        try:
            records.append(parse_record(line))
        except (LogError, ValueError):
            partial_reason = f"unparseable record line {line[:40]!r}"
            break
    else:
        if status is None:
            partial_reason = "missing terminal status"

    log = SessionLog(header=header, records=records, status=status)
    if partial_reason is not None and status is None:
        last = records[-1].tick if records else -1
        raise PartialLogError(f"{path}: truncated log ({partial_reason})",
                              last_valid_tick=last, partial=log)
    return log


def engine_from_header(header: dict) -> SimulationEngine:
    cfg_doc = header.get("config")
    if not cfg_doc:
        raise ReplayRefusedError("log header carries no configs")
    if header.get("config_hash") != config_hash(cfg_doc):
        raise ReplayRefusedError("config hash mismatch between header "
                                 "and engine build")
    spec = SessionLog(header, []).task_spec
    loop_cfg = LoopConfig(
        tick_rate=float(cfg_doc["loop"]["tick_rate"]),
        force_scale=float(cfg_doc["loop"]["force_scale"]),
        force_max=float(cfg_doc["loop"]["force_max"]),
        velocity_filter_cutoff=float(cfg_doc["loop"]["velocity_filter_cutoff"]),
    )
    params = build_tissue_params(cfg_doc, sigma=spec.sigma)
    scene = build_scene(cfg_doc)
    return SimulationEngine(scene, params, loop_cfg, spec)


def replay(log: SessionLog) -> list[TickRecord]:
    """Re-run the pipeline on logged positions; raise on any bit mismatch."""
    engine = engine_from_header(log.header)
    recomputed: list[TickRecord] = []
    for logged in log.records:
        rec = engine.tick_from_position(logged.tick, logged.position)
        recomputed.append(rec)
        for name in ("model_force", "emitted_force", "filtered_speed",
                     "penetration", "fractured"):
            a, b = getattr(logged, name), getattr(rec, name)
            if a != b:
                raise ReplayDivergence(logged.tick, name, a, b)
    return recomputed
