"""Task protocol state machines: pre-training, training, evaluation.

A session starts Idle, enters InContact at first floor touch, and
terminates by task-specific rules. Forbidden-wall contacts are counted
on rising edges so a held contact is one hit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum

from .scene import ContactSet

TRAINING_RETRACT_MM = 1.0  # penetration below which a fractured training run ends


class TaskKind(Enum):
    PRE_TRAINING = "pre_training"
    TRAINING = "training"
    EVALUATION = "evaluation"


class Outcome(Enum):
    SUCCESS = "success"
    FORBIDDEN_ONLY = "forbidden_only"
    BOTH = "both"
    NEITHER = "neither"


class SessionStateError(RuntimeError):
    """Raised on illegal session state transitions or queries."""


@dataclass(frozen=True)
class TaskSpec:
    kind: TaskKind
    level: int
    sigma: float
    timeout: float = 120.0
    seed: int = 0
    tick_rate: float = 1000.0

    def __post_init__(self):
        if self.level not in (1, 2, 3, 4, 5):
            raise ValueError(f"level must be 1..5, got {self.level}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


class Phase(Enum):
    IDLE = "idle"
    IN_CONTACT = "in_contact"
    TERMINATED = "terminated"


@dataclass(frozen=True)
class SessionStatus:
    phase: Phase = Phase.IDLE
    contact_start_tick: int | None = None
    end_tick: int | None = None
    forbidden_hits: int = 0
    goal_reached: bool = False
    fractured: bool = False
    forbidden_active: bool = False  # previous tick's contact, for edge detection

    @property
    def terminated(self) -> bool:
        return self.phase is Phase.TERMINATED


LEVEL_GENERATOR = "python-random-mersenne-twister"


def assign_level(seed: int) -> int:
    """Deterministic uniform draw over levels 1..5 (Mersenne Twister)."""
    return random.Random(seed).randrange(1, 6)


def advance(status: SessionStatus, contacts: ContactSet, fractured: bool,
            tick: int, spec: TaskSpec) -> SessionStatus:
    """One tick of the task state machine."""
    if status.terminated:
        raise SessionStateError("cannot advance a terminated session")

    phase = status.phase
    contact_start = status.contact_start_tick
    if phase is Phase.IDLE and contacts.floor_contact:
        phase = Phase.IN_CONTACT
        contact_start = tick

    hits = status.forbidden_hits
    if contacts.forbidden_hit and not status.forbidden_active:
        hits += 1

    goal = status.goal_reached or contacts.goal_hit
    frac = status.fractured or fractured

    end_tick = None
    timeout_tick = int(spec.timeout * spec.tick_rate)
    timed_out = tick >= timeout_tick
    if spec.kind is TaskKind.EVALUATION:
        if contacts.goal_hit or timed_out:
            end_tick = tick
    elif spec.kind is TaskKind.TRAINING:
        if (frac and contacts.penetration < TRAINING_RETRACT_MM) or timed_out:
            end_tick = tick
    else:  # pre-training runs to timeout
        if timed_out:
            end_tick = tick

    if end_tick is not None:
        phase = Phase.TERMINATED

    return SessionStatus(
        phase=phase,
        contact_start_tick=contact_start,
        end_tick=end_tick,
        forbidden_hits=hits,
        goal_reached=goal,
        fractured=frac,
        forbidden_active=contacts.forbidden_hit,
    )


def classify_outcome(status: SessionStatus) -> Outcome:
    """Partition of terminated sessions by (goal reached, forbidden hits)."""
    if not status.terminated:
        raise SessionStateError("outcome undefined before termination")
    if status.goal_reached:
        return Outcome.BOTH if status.forbidden_hits > 0 else Outcome.SUCCESS
    return (Outcome.FORBIDDEN_ONLY if status.forbidden_hits > 0
            else Outcome.NEITHER)
