"""Per-session and per-group performance metrics.

Efficiency (path length, completion time), safety (goal / forbidden-wall
hit counts and outcome class) and quality (questionnaire scores, which
are ingested rather than computed). Metrics are evaluated over the
contact window: from the first floor contact to session termination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .session import Outcome, SessionStatus, classify_outcome

QUESTIONNAIRE_ITEMS = (
    "How users will sense the fracture during the operation",
    "How users will sense the tissue hardening effect of tool interaction "
    "with the tissues",
    "How effective will be the developed platform for education",
)


class MetricsError(ValueError):
    """Raised on empty inputs or non-terminated sessions."""


@dataclass(frozen=True)
class SessionMetrics:
    path_length: float        # mm
    completion_time: float    # s
    mean_force: float         # N
    peak_force: float         # N
    goal_hits: int
    forbidden_hits: int
    outcome: Outcome


@dataclass(frozen=True)
class MetricStat:
    mean: float
    std: float
    n: int
    degenerate: bool = False  # single-sample std reported as 0


@dataclass(frozen=True)
class GroupReport:
    label: str
    n_sessions: int
    metrics: dict  # metric name -> MetricStat
    outcome_percentages: dict  # Outcome -> percent
    questionnaire: dict  # item label -> MetricStat


def path_length(points) -> float:
    """Sum of straight-line distances between consecutive positions."""
    pts = list(points)
    if not pts:
        raise MetricsError("trajectory must contain at least one point")
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += math.dist(a, b)
    return total


def _contact_window(records, status: SessionStatus):
    if not status.terminated:
        raise MetricsError("session not terminated")
    if status.contact_start_tick is None:
        return []
    start, end = status.contact_start_tick, status.end_tick
    return [r for r in records if start <= r.tick <= end]


def completion_time(status: SessionStatus, dt: float) -> float:
    """Seconds from first floor contact to termination."""
    if not status.terminated:
        raise MetricsError("session not terminated")
    if status.contact_start_tick is None:
        return 0.0
    return (status.end_tick - status.contact_start_tick) * dt


def force_stats(records, status: SessionStatus) -> tuple[float, float]:
    """(mean, peak) emitted force magnitude over the contact window."""
    window = _contact_window(records, status)
    if not window:
        return (0.0, 0.0)
    mags = [math.hypot(*r.emitted_force) for r in window]
    return (sum(mags) / len(mags), max(mags))


def session_metrics(records, status: SessionStatus, dt: float) -> SessionMetrics:
    window = _contact_window(records, status)
    mean_f, peak_f = force_stats(records, status)
    return SessionMetrics(
        path_length=path_length([r.position for r in window]) if window else 0.0,
        completion_time=completion_time(status, dt),
        mean_force=mean_f,
        peak_force=peak_f,
        goal_hits=1 if status.goal_reached else 0,
        forbidden_hits=status.forbidden_hits,
        outcome=classify_outcome(status),
    )


def mean_std(values) -> MetricStat:
    """Mean and sample standard deviation (n-1); n=1 flagged degenerate."""
    vals = list(values)
    n = len(vals)
    if n == 0:
        raise MetricsError("cannot aggregate an empty sample")
    mean = sum(vals) / n
    if n == 1:
        return MetricStat(mean=mean, std=0.0, n=1, degenerate=True)
    var = sum((v - mean) ** 2 for v in vals) / (n - 1)
    return MetricStat(mean=mean, std=math.sqrt(var), n=n)


def aggregate_group(sessions, label: str,
                    questionnaire: dict | None = None) -> GroupReport:
    """Table-style group aggregate across sessions.

    ``questionnaire`` maps item label -> list of 0-10 scores.
    """
    sessions = list(sessions)
    if not sessions:
        raise MetricsError("group must contain at least one session")

    metric_stats = {
        "path_length_mm": mean_std(s.path_length for s in sessions),
        "completion_time_s": mean_std(s.completion_time for s in sessions),
        "mean_force_n": mean_std(s.mean_force for s in sessions),
        "peak_force_n": mean_std(s.peak_force for s in sessions),
        "forbidden_hits": mean_std(s.forbidden_hits for s in sessions),
    }
    n = len(sessions)
    percentages = {
        outcome: 100.0 * sum(1 for s in sessions if s.outcome is outcome) / n
        for outcome in Outcome
    }
    q_stats = {item: mean_std(scores)
               for item, scores in (questionnaire or {}).items()}
    return GroupReport(label=label, n_sessions=n, metrics=metric_stats,
                       outcome_percentages=percentages, questionnaire=q_stats)


def render_report(report: GroupReport) -> str:
    """Human-readable table: one row per item, mean and std per group."""
    lines = [f"Group: {report.label}  (n={report.n_sessions})", ""]
    lines.append(f"{'Item':<72}{'Mean':>10}{'Std':>10}")
    for name, stat in report.metrics.items():
        flag = " *" if stat.degenerate else ""
        lines.append(f"{name:<72}{stat.mean:>10.3f}{stat.std:>10.3f}{flag}")
    for item, stat in report.questionnaire.items():
        flag = " *" if stat.degenerate else ""
        lines.append(f"{item:<72}{stat.mean:>10.2f}{stat.std:>10.2f}{flag}")
    lines.append("")
    lines.append("Outcomes:")
    for outcome, pct in report.outcome_percentages.items():
        lines.append(f"  {outcome.value:<16}{pct:>7.1f}%")
    if any(s.degenerate for s in list(report.metrics.values())
           + list(report.questionnaire.values())):
        lines.append("")
        lines.append("* single-sample std reported as 0")
    return "\n".join(lines)


def report_to_dict(report: GroupReport) -> dict:
    def stat(s: MetricStat) -> dict:
        return {"mean": s.mean, "std": s.std, "n": s.n,
                "degenerate": s.degenerate}
    return {
        "label": report.label,
        "n_sessions": report.n_sessions,
        "metrics": {k: stat(v) for k, v in report.metrics.items()},
        "outcome_percentages": {o.value: p for o, p
                                in report.outcome_percentages.items()},
        "questionnaire": {k: stat(v) for k, v in report.questionnaire.items()},
    }


def export_series(records, path_prefix: str) -> list[str]:
    """Plot-ready tab-delimited series: force, distance and penetration vs time."""
    paths = []
    force_path = f"{path_prefix}_force.tsv"
    with open(force_path, "w", encoding="utf-8") as fh:
        fh.write("t_s\tforce_n\n")
        for r in records:
            fh.write(f"{r.t!r}\t{math.hypot(*r.emitted_force)!r}\n")
    paths.append(force_path)

    dist_path = f"{path_prefix}_distance.tsv"
    with open(dist_path, "w", encoding="utf-8") as fh:
        fh.write("t_s\tcumulative_distance_mm\tpenetration_mm\n")
        total = 0.0
        prev = None
        for r in records:
            if prev is not None:
                total += math.dist(prev, r.position)
            prev = r.position
            fh.write(f"{r.t!r}\t{total!r}\t{r.penetration!r}\n")
    paths.append(dist_path)
    return paths
