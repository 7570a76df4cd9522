"""Rate-dependent tissue force model with fracture.

The coronal orbital floor is modelled phenomenologically: a nonlinear
static force curve plus a velocity-dependent relaxation term before
fracture, and a linear decay past the rate-dependent fracture threshold.
All polynomial coefficients default to the calibrated values; forces are
in model units (see loop.LoopConfig.force_scale for the newton mapping),
displacements in mm, velocities in mm/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class TissueDomainError(ValueError):
    """Raised when a model input is outside the physical domain."""


class FracturePhaseError(RuntimeError):
    """Raised when a post-fracture quantity is requested while intact."""


@dataclass(frozen=True)
class TissueParams:
    """Coefficients of the force model plus the task stiffness multiplier.

    Polynomial coefficients are ordered highest degree first.
    ``sigma`` scales the force-valued curves (static force, fracture
    force, tangent stiffness) to realize the five task stiffness levels.
    """

    fs_coeffs: tuple[float, float, float] = (0.008, 2.087, 8.766)
    ff_coeffs: tuple[float, float, float] = (0.001, -1.176, 697.1)
    xf_coeffs: tuple[float, float, float] = (0.0001, -0.0575, 19.21)
    a_coeffs: tuple[float, float, float, float, float] = (
        1e-7, -7e-5, 0.0101, 0.0485, -79.313)
    tau_s: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.tau_s > 0:
            raise TissueDomainError(f"tau_s must be > 0, got {self.tau_s}")
        if not self.sigma > 0:
            raise TissueDomainError(f"sigma must be > 0, got {self.sigma}")


class Phase(Enum):
    INTACT = "intact"
    FRACTURED = "fractured"


@dataclass(frozen=True)
class FractureState:
    """Latched fracture state. Transitions intact -> fractured only.

    ``v_star`` is the filtered indentation rate at the instant the
    threshold was crossed; ``x_star`` the threshold displacement at that
    rate. Both stay fixed for the remainder of the session.
    """

    phase: Phase = Phase.INTACT
    v_star: float = 0.0
    x_star: float = 0.0

    @property
    def fractured(self) -> bool:
        return self.phase is Phase.FRACTURED


def _check_nonneg(value: float, name: str) -> None:
    if value < 0:
        raise TissueDomainError(f"{name} must be >= 0, got {value}")


def static_force(x: float, params: TissueParams) -> float:
    """Quasi-static indentation force at penetration ``x`` mm."""
    _check_nonneg(x, "penetration")
    c3, c2, c1 = params.fs_coeffs
    return params.sigma * ((c3 * x + c2) * x + c1) * x


def fracture_displacement(v: float, params: TissueParams) -> float:
    """Indentation threshold at which the tissue fails, clamped at 0."""
    _check_nonneg(v, "velocity")
    c2, c1, c0 = params.xf_coeffs
    return max(0.0, (c2 * v + c1) * v + c0)


def fracture_force(v: float, params: TissueParams) -> float:
    """Force at the instant of failure for insertion rate ``v``."""
    _check_nonneg(v, "velocity")
    c2, c1, c0 = params.ff_coeffs
    return params.sigma * ((c2 * v + c1) * v + c0)


def post_slope(v: float, params: TissueParams) -> float:
    """Post-fracture force/displacement slope; negative over the working range."""
    _check_nonneg(v, "velocity")
    c4, c3, c2, c1, c0 = params.a_coeffs
    return (((c4 * v + c3) * v + c2) * v + c1) * v + c0


def tangent_stiffness(x: float, params: TissueParams) -> float:
    """Local stiffness of the static curve, d(static_force)/dx."""
    _check_nonneg(x, "penetration")
    c3, c2, c1 = params.fs_coeffs
    return params.sigma * ((3.0 * c3 * x + 2.0 * c2) * x + c1)


def prefracture_force(x: float, v: float, params: TissueParams) -> float:
    """Pre-fracture force: static curve plus the rate relaxation term.

    The relaxation term K(x) * v * tau_s * (1 - exp(-x / (v tau_s)))
    vanishes analytically as v -> 0, so v == 0 returns the static force
    exactly.
    """
    _check_nonneg(x, "penetration")
    _check_nonneg(v, "velocity")
    fs = static_force(x, params)
    vt = v * params.tau_s
    if vt == 0.0 or x == 0.0:
        return fs
    return fs + tangent_stiffness(x, params) * vt * (1.0 - math.exp(-x / vt))


def postfracture_force(x: float, state: FractureState,
                       params: TissueParams) -> float:
    """Post-fracture force: linear decay from the latched fracture point."""
    _check_nonneg(x, "penetration")
    if not state.fractured:
        raise FracturePhaseError("post-fracture force requested while intact")
    f = (fracture_force(state.v_star, params)
         + post_slope(state.v_star, params) * (x - state.x_star))
    return max(0.0, f)


def step(x: float, v_filtered: float, state: FractureState,
         params: TissueParams) -> tuple[float, FractureState]:
    """One model evaluation: returns (force, next state).

    Crossing the rate-dependent threshold latches the fracture with the
    velocity at crossing time; the latch never reverts.
    """
    x = max(0.0, x)
    v = max(0.0, v_filtered)
    if state.fractured:
        return postfracture_force(x, state, params), state
    if x <= fracture_displacement(v, params):
        return prefracture_force(x, v, params), state
    new_state = FractureState(
        phase=Phase.FRACTURED,
        v_star=v,
        x_star=fracture_displacement(v, params),
    )
    return postfracture_force(x, new_state, params), new_state
