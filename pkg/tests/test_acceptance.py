"""Acceptance suite: one test per release criterion.

Each test prints a PASS line for its criterion; run with `pytest -s
tests/test_acceptance.py` to see the checklist.
"""

import math
import random
import statistics
import time

import numpy as np
import pytest

from sinusim import tissue
from sinusim.control import (LpvModel, MpcConfig, identify_lpv, mpc_step)
from sinusim.loop import ScriptedSource
from sinusim.metrics import (aggregate_group, completion_time, mean_std,
                             path_length)
from sinusim.runner import (build_engine, make_task_spec,
                            run_scripted_session, run_scripted_session_in_memory)
from sinusim.scene import classify_contacts, default_scene
from sinusim.session import Outcome, Phase, SessionStatus, TaskKind
from sinusim.metrics import SessionMetrics
from sinusim.storage import read_log, replay
from tests.test_control import grid_search_oracle
from tests.conftest import straight_line_samples

P = tissue.TissueParams()


def _ok(name):
    print(f"PASS: {name}")


class TestAcceptance:
    def test_model_oracle_suite(self):
        t0 = time.perf_counter()
        fs = [0.008, 2.087, 8.766, 0.0]
        ff = [0.001, -1.176, 697.1]
        xf = [0.0001, -0.0575, 19.21]
        aa = [1e-7, -7e-5, 0.0101, 0.0485, -79.313]
        for x in np.arange(0.0, 25.0 + 1e-9, 0.1):
            e = float(np.polyval(fs, x))
            assert abs(tissue.static_force(float(x), P) - e) <= 1e-12 * (1 + abs(e))
        for v in np.arange(0.0, 200.0 + 1e-9, 1.0):
            v = float(v)
            for fn, poly in ((tissue.fracture_displacement, xf),
                             (tissue.fracture_force, ff),
                             (tissue.post_slope, aa)):
                e = float(np.polyval(poly, v))
                if fn is tissue.fracture_displacement:
                    e = max(0.0, e)
                assert abs(fn(v, P) - e) <= 1e-12 * (1 + abs(e))
        # spot anchors
        assert tissue.fracture_displacement(0.0, P) == 19.21
        assert tissue.fracture_force(0.0, P) == 697.1
        assert tissue.post_slope(0.0, P) == -79.313
        assert tissue.static_force(10.0, P) == pytest.approx(304.36, abs=1e-9)
        assert tissue.fracture_displacement(50.0, P) == pytest.approx(16.585)
        assert tissue.post_slope(50.0, P) == pytest.approx(-59.763)
        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0
        _ok(f"model oracle suite (1e-12 rel, {elapsed * 1e3:.0f} ms)")

    def test_fracture_behavior(self):
        # single latch under monotone insertion
        state = tissue.FractureState()
        transitions = 0
        for x in np.arange(0.0, 25.0, 0.01):
            was = state.fractured
            _, state = tissue.step(float(x), 0.5, state, P)
            transitions += int(state.fractured and not was)
        assert transitions == 1
        # continuity at the latch point
        for v_star in (0.0, 10.0, 80.0, 200.0):
            st = tissue.FractureState(tissue.Phase.FRACTURED, v_star,
                                      tissue.fracture_displacement(v_star, P))
            assert tissue.postfracture_force(st.x_star, st, P) == \
                tissue.fracture_force(v_star, P)
        # quasi-static force drop at the threshold
        peak = tissue.prefracture_force(19.21, 0.0, P)
        assert peak == pytest.approx(995.3, abs=0.1)
        assert tissue.fracture_force(0.0, P) == 697.1
        assert peak > 697.1
        _ok("fracture behavior (single latch, F2 continuity, "
            "995.3 -> 697.1 drop)")

    def test_quasi_static_and_monotonicity(self):
        for x in np.arange(0.0, 25.0 + 1e-9, 0.1):
            x = float(x)
            fs = tissue.static_force(x, P)
            assert abs(tissue.prefracture_force(x, 1e-9, P) - fs) \
                <= 1e-6 * (1.0 + fs)
        for v in np.arange(0.0, 200.0 + 1e-9, 1.0):
            v = float(v)
            xf_v = tissue.fracture_displacement(v, P)
            prev = tissue.prefracture_force(0.0, v, P)
            for x in np.arange(0.01, xf_v + 1e-12, 0.01):
                cur = tissue.prefracture_force(float(x), v, P)
                assert cur > prev
                prev = cur
        _ok("quasi-static limit and F1 monotonicity over the grid")

    def test_determinism_and_replay(self, default_config, tmp_path):
        paths = []
        for name in ("a.log", "b.log"):
            spec = make_task_spec(default_config, TaskKind.EVALUATION, 3, 7)
            src = ScriptedSource(straight_line_samples())
            out = tmp_path / name
            run_scripted_session(default_config, spec, src, 10.0, str(out))
            paths.append(out)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        log = read_log(str(paths[0]))
        assert replay(log) == log.records
        _ok("determinism (byte-identical logs, bit-exact replay)")

    def test_realtime_budget(self, default_config):
        spec = make_task_spec(default_config, TaskKind.EVALUATION, 3, 7,)
        engine = build_engine(default_config, spec)
        src = ScriptedSource(straight_line_samples(
            start=(0.0, 0.0, 5.0), end=(0.0, 0.0, -22.0), duration=60.0))
        n = 60_000
        dt = engine.cfg.dt
        times = []
        for k in range(n):
            pose = src.latest(k * dt)
            t0 = time.perf_counter()
            engine.tick(k, pose)
            times.append(time.perf_counter() - t0)
        mean = sum(times) / n
        p999 = sorted(times)[int(0.999 * n)]
        assert mean < 200e-6, f"mean tick {mean * 1e6:.1f} us"
        assert p999 < 1e-3, f"p99.9 tick {p999 * 1e6:.1f} us"
        _ok(f"real-time budget (60 s run: mean {mean * 1e6:.1f} us, "
            f"p99.9 {p999 * 1e6:.1f} us)")

    def test_control_criteria(self):
        rng = random.Random(123)
        cfg = MpcConfig(horizon=4, u_max=3.3)
        for _ in range(10_000):
            model = LpvModel(a0=rng.uniform(-2, 2), a1=rng.uniform(-1, 1),
                             b=rng.uniform(-2, 2) or 0.1)
            u = mpc_step(model, rng.uniform(-100, 100),
                         [rng.uniform(-100, 100)], cfg,
                         theta=rng.uniform(0, 1000))
            assert abs(u) <= 3.3 + 1e-12
        for _ in range(5):
            icfg = MpcConfig(horizon=rng.randint(1, 5),
                             q=rng.uniform(0.5, 2.0),
                             r=rng.uniform(1e-3, 1e-1), u_max=3.3)
            model = LpvModel(a0=rng.uniform(-0.95, 0.95), a1=0.0,
                             b=rng.uniform(0.05, 1.0))
            x0 = rng.uniform(-2, 2)
            ref = [rng.uniform(-4, 4) for _ in range(icfg.horizon)]
            assert mpc_step(model, x0, ref, icfg) == pytest.approx(
                grid_search_oracle(model, x0, ref, icfg)[0], abs=2e-3)
        rows = []
        x = 0.1
        for _ in range(200):
            theta = rng.uniform(0, 10)
            u = rng.uniform(-1, 1)
            x_next = (0.5 + 0.02 * theta) * x + 0.3 * u
            rows.append((theta, x, u, x_next))
            x = x_next
        m = identify_lpv(rows)
        assert m.a0 == pytest.approx(0.5, rel=1e-6)
        assert m.a1 == pytest.approx(0.02, rel=1e-6)
        assert m.b == pytest.approx(0.3, rel=1e-6)
        _ok("control (|u| <= 3.3 N on 1e4 fuzzed calls, DP-grid oracle "
            "2e-3, LPV recovery 1e-6)")

    def test_metrics_criteria(self):
        assert path_length([(0, 0, 0), (3, 4, 0)]) == 5.0
        rng = random.Random(17)
        for _ in range(30):
            vals = [rng.uniform(-10, 10) for _ in range(rng.randint(2, 30))]
            s = mean_std(vals)
            assert abs(s.mean - float(np.mean(vals))) <= 1e-12 * (1 + abs(s.mean))
            assert abs(s.std - float(np.std(vals, ddof=1))) \
                <= 1e-12 * (1 + s.std)
        st = SessionStatus(phase=Phase.TERMINATED, contact_start_tick=1000,
                           end_tick=6000, goal_reached=True)
        assert completion_time(st, 0.001) == 5.0
        def metric(outcome):
            return SessionMetrics(path_length=10.0, completion_time=5.0,
                                  mean_force=1.0, peak_force=2.0,
                                  goal_hits=1, forbidden_hits=0,
                                  outcome=outcome)

        sessions = ([metric(Outcome.SUCCESS)] * 14
                    + [metric(Outcome.FORBIDDEN_ONLY)] * 5
                    + [metric(Outcome.BOTH)] * 1)
        pct = aggregate_group(sessions, "g").outcome_percentages
        assert (pct[Outcome.SUCCESS], pct[Outcome.FORBIDDEN_ONLY],
                pct[Outcome.BOTH]) == (70.0, 25.0, 5.0)
        _ok("metrics (oracles 1e-12, completion 5.0 s, 70/25/5 pipeline)")

    def test_scene_criterion(self):
        scene = default_scene()
        start, end = (0.0, 0.0, 10.0), scene.goal.center
        n = int(math.dist(start, end) / 0.01)
        states = []
        for i in range(n + 1):
            a = i / n
            tip = tuple(s + a * (e - s) for s, e in zip(start, end))
            c = classify_contacts(tip, scene)
            assert not c.forbidden_hit
            state = ("goal" if c.goal_hit
                     else "floor" if c.floor_contact else "free")
            if not states or states[-1] != state:
                states.append(state)
        assert states == ["free", "floor", "goal"]
        _ok("scene (floor -> goal ordering, no forbidden contact)")

    def test_cli_formats_criterion(self, default_config, tmp_path):
        from sinusim.cli import main

        traj = tmp_path / "traj.txt"
        traj.write_text("\n".join(
            f"{t} {p[0]} {p[1]} {p[2]}" for t, p in straight_line_samples())
            + "\n")
        out = tmp_path / "s.log"
        assert main(["run", "--level", "3", "--seed", "7",
                     "--input", str(traj), "--out", str(out)]) == 0
        log = read_log(str(out))
        copy = tmp_path / "copy.log"
        from sinusim.storage import write_log
        write_log(str(copy), log)
        assert copy.read_bytes() == out.read_bytes()
        lines = out.read_text().splitlines()
        parts = lines[25000].split()
        parts[7] = repr(float(parts[7]) + 1.0)
        lines[25000] = " ".join(parts)
        bad = tmp_path / "tampered.log"
        bad.write_text("\n".join(lines) + "\n")
        assert main(["replay", str(bad)]) == 5
        assert main(["replay", str(out)]) == 0
        _ok("CLI/formats (round-trip equality, tamper detection)")
