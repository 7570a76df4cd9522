"""Command-line entry points.

Exit codes:
    0  success
    2  usage error (argparse)
    3  configuration error
    4  log format / IO error
    5  replay divergence or refused replay
    6  identification error
"""

from __future__ import annotations

import argparse
import json
import sys

from . import metrics as metrics_mod
from . import storage
from .config import ConfigError, load_config
from .control import IdentificationError, identify_lpv
from .loop import load_trajectory
from .runner import make_task_spec, run_scripted_session
from .session import TaskKind, assign_level

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_FORMAT = 4
EXIT_REPLAY = 5
EXIT_IDENT = 6


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="config file path (or SINUSIM_CONFIG env var)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sinusim",
        description="Deterministic haptic sinus-surgery training engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scripted session")
    _add_common(p)
    p.add_argument("--task", choices=[k.value for k in TaskKind],
                   default="evaluation")
    p.add_argument("--level", type=int, default=None,
                   help="stiffness level 1..5; default drawn from seed")
    p.add_argument("--input", required=True, help="trajectory file (t x y z)")
    p.add_argument("--duration", type=float, default=None,
                   help="seconds; default = last trajectory timestamp")

    p = sub.add_parser("serve", help="start the live websocket endpoint")
    _add_common(p)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")

    p = sub.add_parser("replay", help="verify a log reproduces bit-exactly")
    _add_common(p)
    p.add_argument("log")

    p = sub.add_parser("metrics", help="print per-session metrics")
    _add_common(p)
    p.add_argument("log")
    p.add_argument("--series", default=None,
                   help="prefix for plot-ready .tsv series files")

    p = sub.add_parser("report", help="aggregate a group of session logs")
    _add_common(p)
    p.add_argument("logs", nargs="+")
    p.add_argument("--label", default="group")
    p.add_argument("--questionnaire", default=None,
                   help="JSON file: {item label: [scores]}")

    p = sub.add_parser("fit-lpv", help="identify the LPV model from a log")
    _add_common(p)
    p.add_argument("log")

    p = sub.add_parser("scene-check", help="validate scene geometry")
    _add_common(p)
    return parser


def _session_metrics_of(path: str):
    log = storage.read_log(path)
    if log.status is None or not log.status.terminated:
        raise storage.LogError(f"{path}: session did not terminate")
    dt = 1.0 / log.task_spec.tick_rate
    return metrics_mod.session_metrics(log.records, log.status, dt), log


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    level = args.level if args.level is not None else assign_level(args.seed)
    spec = make_task_spec(cfg, TaskKind(args.task), level, args.seed)
    source = load_trajectory(args.input)
    duration = (args.duration if args.duration is not None
                else source.samples[-1][0])
    out = args.out or "session.log"
    status = run_scripted_session(cfg, spec, source, duration, out)
    print(f"wrote {out}: level={level} sigma={spec.sigma} "
          f"phase={status.phase.value} goal={status.goal_reached} "
          f"forbidden_hits={status.forbidden_hits} "
          f"fractured={status.fractured}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .bridge import create_app
    cfg = load_config(args.config)
    uvicorn.run(create_app(cfg), host=args.host, port=args.port,
                log_level="warning")
    return EXIT_OK


def cmd_replay(args) -> int:
    log = storage.read_log(args.log)
    try:
        storage.replay(log)
    except storage.ReplayDivergence as exc:
        print(f"DIVERGED: {exc}", file=sys.stderr)
        return EXIT_REPLAY
    except storage.ReplayRefusedError as exc:
        print(f"REFUSED: {exc}", file=sys.stderr)
        return EXIT_REPLAY
    n = len(log.records)
    print(f"replay ok: {n} records reproduced bit-exactly")
    return EXIT_OK


def cmd_metrics(args) -> int:
    sm, log = _session_metrics_of(args.log)
    print(json.dumps({
        "path_length_mm": sm.path_length,
        "completion_time_s": sm.completion_time,
        "mean_force_n": sm.mean_force,
        "peak_force_n": sm.peak_force,
        "goal_hits": sm.goal_hits,
        "forbidden_hits": sm.forbidden_hits,
        "outcome": sm.outcome.value,
    }, indent=2))
    if args.series:
        for path in metrics_mod.export_series(log.records, args.series):
            print(f"wrote {path}")
    return EXIT_OK


def cmd_report(args) -> int:
    sessions = [_session_metrics_of(p)[0] for p in args.logs]
    questionnaire = None
    if args.questionnaire:
        with open(args.questionnaire, "r", encoding="utf-8") as fh:
            questionnaire = json.load(fh)
    report = metrics_mod.aggregate_group(sessions, args.label, questionnaire)
    print(metrics_mod.render_report(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(metrics_mod.report_to_dict(report), fh, indent=2)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_fit_lpv(args) -> int:
    from .config import build_tissue_params
    from .tissue import tangent_stiffness
    import math

    log = storage.read_log(args.log)
    params = build_tissue_params(log.header["config"],
                                 sigma=log.task_spec.sigma)
    # Environment identification: penetration as the state, emitted
    # force as the input, local stiffness as the scheduling parameter.
    x_seq = [r.penetration for r in log.records]
    u_seq = [math.hypot(*r.emitted_force) for r in log.records]
    theta = [tangent_stiffness(r.penetration, params) for r in log.records]
    rows = [(theta[k], x_seq[k], u_seq[k], x_seq[k + 1])
            for k in range(len(x_seq) - 1)]
    model = identify_lpv(rows)
    print(json.dumps({"a0": model.a0, "a1": model.a1, "b": model.b,
                      "residual_rms": model.residual_rms}, indent=2))
    return EXIT_OK


def cmd_scene_check(args) -> int:
    from .config import build_scene
    from .scene import classify_contacts

    cfg = load_config(args.config)
    scene = build_scene(cfg)
    # Probe along the approach line through floor center to the goal.
    fc, gc = scene.floor.center, scene.goal.center
    start = tuple(f + 10.0 * n for f, n in zip(fc, scene.floor.normal))
    steps = 4000
    seq = []
    for i in range(steps + 1):
        a = i / steps
        tip = tuple(s + a * (g - s) for s, g in zip(start, gc))
        c = classify_contacts(tip, scene)
        state = ("goal" if c.goal_hit else
                 "floor" if c.floor_contact else "free")
        if not seq or seq[-1] != state:
            seq.append(state)
        if c.forbidden_hit:
            print("scene check FAILED: probe touches forbidden wall",
                  file=sys.stderr)
            return EXIT_CONFIG
    print(f"scene ok: probe sequence {' -> '.join(seq)}")
    if seq != ["free", "floor", "goal"]:
        print("scene check FAILED: unexpected contact ordering",
              file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "serve": cmd_serve,
    "replay": cmd_replay,
    "metrics": cmd_metrics,
    "report": cmd_report,
    "fit-lpv": cmd_fit_lpv,
    "scene-check": cmd_scene_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except storage.PartialLogError as exc:
        print(f"partial log: {exc} (last valid tick "
              f"{exc.last_valid_tick})", file=sys.stderr)
        return EXIT_FORMAT
    except (storage.LogVersionError, storage.LogError, OSError) as exc:
        print(f"log error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except IdentificationError as exc:
        print(f"identification error: {exc}", file=sys.stderr)
        return EXIT_IDENT


if __name__ == "__main__":
    sys.exit(main())
