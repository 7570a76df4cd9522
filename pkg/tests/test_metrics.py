import math
import random

import numpy as np
import pytest

from sinusim.loop import TickRecord
from sinusim.metrics import (GroupReport, MetricsError, QUESTIONNAIRE_ITEMS,
                             aggregate_group, completion_time, force_stats,
                             mean_std, path_length, render_report,
                             report_to_dict, session_metrics, SessionMetrics)
from sinusim.session import Outcome, Phase, SessionStatus


def record(tick, pos=(0.0, 0.0, 0.0), force=(0.0, 0.0, 0.0), dt=0.001):
    return TickRecord(tick=tick, t=tick * dt, position=pos,
                      filtered_speed=0.0, penetration=0.0, model_force=0.0,
                      emitted_force=force, fractured=False,
                      floor_contact=False, goal_hit=False, forbidden_hit=False)


def terminated(start, end, goal=True, hits=0):
    return SessionStatus(phase=Phase.TERMINATED, contact_start_tick=start,
                         end_tick=end, goal_reached=goal, forbidden_hits=hits)


class TestPathLength:
    def test_3_4_5(self):
        assert path_length([(0, 0, 0), (3, 4, 0)]) == 5.0

    def test_single_point(self):
        assert path_length([(1, 2, 3)]) == 0.0

    def test_l_shape(self):
        assert path_length([(0, 0, 0), (1, 0, 0), (1, 1, 0)]) == 2.0

    def test_empty_error(self):
        with pytest.raises(MetricsError):
            path_length([])

    def test_translation_invariance(self):
        rng = random.Random(3)
        pts = [(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5))
               for _ in range(20)]
        shift = (10.0, -4.0, 2.5)
        moved = [tuple(c + s for c, s in zip(p, shift)) for p in pts]
        assert path_length(moved) == pytest.approx(path_length(pts),
                                                   rel=1e-12)

    def test_uniform_scaling(self):
        pts = [(0, 0, 0), (1, 2, 3), (-1, 0, 4)]
        scaled = [tuple(3.0 * c for c in p) for p in pts]
        assert path_length(scaled) == pytest.approx(3.0 * path_length(pts),
                                                    rel=1e-12)


class TestCompletionTime:
    def test_synthetic_contact_to_goal(self):
        assert completion_time(terminated(1000, 6000), 0.001) == 5.0

    def test_same_tick(self):
        assert completion_time(terminated(100, 100), 0.001) == 0.0

    def test_timeout_session(self):
        # Neither outcome: ends at timeout, span still from first contact.
        st = terminated(2000, 120_000, goal=False)
        assert completion_time(st, 0.001) == 118.0

    def test_non_terminated_error(self):
        with pytest.raises(MetricsError):
            completion_time(SessionStatus(), 0.001)


class TestForceStats:
    def test_constant_force(self):
        recs = [record(k, force=(0.0, 0.0, 2.0)) for k in range(10)]
        assert force_stats(recs, terminated(0, 9)) == (2.0, 2.0)

    def test_ramp(self):
        n = 100
        recs = [record(k, force=(0.0, 0.0, 3.3 * k / (n - 1)))
                for k in range(n)]
        mean, peak = force_stats(recs, terminated(0, n - 1))
        assert peak == pytest.approx(3.3)
        assert mean == pytest.approx(1.65)

    def test_empty_window(self):
        st = SessionStatus(phase=Phase.TERMINATED, contact_start_tick=None,
                           end_tick=None)
        assert force_stats([], st) == (0.0, 0.0)

    def test_window_excludes_pre_contact(self):
        recs = [record(k, force=(0.0, 0.0, 10.0)) for k in range(5)]
        recs += [record(k, force=(0.0, 0.0, 2.0)) for k in range(5, 10)]
        mean, peak = force_stats(recs, terminated(5, 9))
        assert (mean, peak) == (2.0, 2.0)


class TestAggregateGroup:
    def metric(self, outcome, **kw):
        base = dict(path_length=10.0, completion_time=5.0, mean_force=1.0,
                    peak_force=2.0, goal_hits=1, forbidden_hits=0)
        base.update(kw)
        return SessionMetrics(outcome=outcome, **base)

    def test_mean_std_hand_computed(self):
        s = mean_std([7.0, 8.0, 9.0])
        assert s.mean == 8.0 and s.std == 1.0

    def test_single_sample_degenerate(self):
        s = mean_std([4.2])
        assert s.std == 0.0 and s.degenerate

    def test_against_two_pass_oracle(self):
        rng = random.Random(11)
        for _ in range(50):
            vals = [rng.uniform(-100, 100) for _ in range(rng.randint(2, 40))]
            s = mean_std(vals)
            assert s.mean == pytest.approx(float(np.mean(vals)), rel=1e-12)
            assert s.std == pytest.approx(float(np.std(vals, ddof=1)),
                                          rel=1e-12)

    def test_group_percentages_70_25_5(self):
        sessions = ([self.metric(Outcome.SUCCESS)] * 14
                    + [self.metric(Outcome.FORBIDDEN_ONLY, goal_hits=0,
                                   forbidden_hits=1)] * 5
                    + [self.metric(Outcome.BOTH, forbidden_hits=1)] * 1)
        report = aggregate_group(sessions, "group-i")
        pct = report.outcome_percentages
        assert pct[Outcome.SUCCESS] == pytest.approx(70.0)
        assert pct[Outcome.FORBIDDEN_ONLY] == pytest.approx(25.0)
        assert pct[Outcome.BOTH] == pytest.approx(5.0)
        assert sum(pct.values()) == pytest.approx(100.0, abs=0.01)

    def test_questionnaire_items_in_report(self):
        q = {item: [7.0, 8.0, 9.0] for item in QUESTIONNAIRE_ITEMS}
        report = aggregate_group([self.metric(Outcome.SUCCESS)], "g", q)
        rendered = render_report(report)
        assert "How users will sense the fracture during the operation" \
            in rendered
        d = report_to_dict(report)
        for item in QUESTIONNAIRE_ITEMS:
            assert d["questionnaire"][item]["mean"] == 8.0

    def test_empty_group_error(self):
        with pytest.raises(MetricsError):
            aggregate_group([], "empty")


class TestCrossModuleConsistency:
    def test_completion_matches_session_span(self, evaluation_log):
        st = evaluation_log.status
        dt = 1.0 / evaluation_log.task_spec.tick_rate
        span = (st.end_tick - st.contact_start_tick) * dt
        assert completion_time(st, dt) == span
        sm = session_metrics(evaluation_log.records, st, dt)
        assert sm.completion_time == span
        assert sm.outcome is Outcome.SUCCESS
        assert sm.peak_force >= sm.mean_force >= 0.0
        assert sm.path_length > 0.0
