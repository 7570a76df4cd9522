"""Environment identification and input-constrained force tracking.

The haptic environment is treated as a scalar parameter-varying system
x_{k+1} = a(theta_k) x_k + b u_k with a(theta) affine in the scheduling
parameter (local tissue stiffness). The controller is a receding-horizon
tracker with a hard box constraint on the commanded force: the
scheduling parameter is frozen at its current value for the horizon and
the resulting box-constrained least-squares problem is solved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear


class IdentificationError(ValueError):
    """Raised when the regression data cannot determine the model."""


_THETA_VAR_TOL = 1e-12
_RANK_RTOL = 1e-9


@dataclass(frozen=True)
class LpvModel:
    """Scalar model x+ = (a0 + a1*theta) x + b u, theta clipped to bounds."""

    a0: float
    a1: float
    b: float
    theta_bounds: tuple[float, float] = (0.0, 1000.0)
    residual_rms: float = 0.0

    def __post_init__(self):
        lo, hi = self.theta_bounds
        if lo > hi:
            raise ValueError(f"theta bounds reversed: {self.theta_bounds}")

    def a(self, theta: float) -> float:
        return self.a0 + self.a1 * theta


@dataclass(frozen=True)
class MpcConfig:
    horizon: int = 10
    q: float = 1.0
    r: float = 1e-4
    u_max: float = 3.3

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.q <= 0 or self.r <= 0:
            raise ValueError("weights must be > 0")
        if self.u_max <= 0:
            raise ValueError("u_max must be > 0")


def identify_lpv(log, theta_bounds: tuple[float, float] = (0.0, 1000.0)
                 ) -> LpvModel:
    """Least-squares fit of the scalar LPV model from (theta, x, u, x_next) rows.

    With no variation in theta the affine split of a(theta) is not
    identifiable; the fit then collapses to a constant-a model (a1 = 0).
    """
    rows = list(log)
    if len(rows) < 3:
        raise IdentificationError(f"need >= 3 samples, got {len(rows)}")
    theta = np.array([r[0] for r in rows], dtype=float)
    x = np.array([r[1] for r in rows], dtype=float)
    u = np.array([r[2] for r in rows], dtype=float)
    y = np.array([r[3] for r in rows], dtype=float)

    if float(np.var(theta)) > _THETA_VAR_TOL:
        A = np.column_stack([x, theta * x, u])
    else:
        A = np.column_stack([x, u])

    scale = float(np.abs(A).max())
    if scale == 0.0 or np.linalg.matrix_rank(A, tol=_RANK_RTOL * scale) < A.shape[1]:
        raise IdentificationError("regression is rank deficient "
                                  "(inputs not persistently exciting)")
    coeffs, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    residual = y - A @ coeffs
    rms = float(np.sqrt(np.mean(residual ** 2)))
    if A.shape[1] == 3:
        a0, a1, b = (float(c) for c in coeffs)
    else:
        a0, b = (float(c) for c in coeffs)
        a1 = 0.0
    return LpvModel(a0=a0, a1=a1, b=b, theta_bounds=theta_bounds,
                    residual_rms=rms)


def schedule_theta(stiffness: float, model: LpvModel) -> float:
    """Map the local tangent stiffness onto the admissible scheduling range."""
    lo, hi = model.theta_bounds
    return min(max(stiffness, lo), hi)


def mpc_step(model: LpvModel, x0: float, reference, cfg: MpcConfig,
             theta: float | None = None) -> float:
    """First input of the constrained horizon optimum.

    Minimizes sum_k q (x_k - ref_k)^2 + r u_k^2 over the horizon with
    theta frozen, subject to |u_k| <= u_max. The reference is padded by
    holding its last value. Always returns a value inside the box.
    """
    ref = list(reference)
    if not ref:
        raise ValueError("reference trajectory must have length >= 1")
    n = cfg.horizon
    ref = (ref + [ref[-1]] * n)[:n]

    a = model.a(schedule_theta(theta, model)) if theta is not None else model.a0
    b = model.b

    # x_k = a^k x0 + sum_{j<k} a^{k-1-j} b u_j, k = 1..N
    powers = np.array([a ** k for k in range(n + 1)])
    free = powers[1:] * x0
    G = np.zeros((n, n))
    for k in range(1, n + 1):
        for j in range(k):
            G[k - 1, j] = powers[k - 1 - j] * b

    sq = np.sqrt(cfg.q)
    sr = np.sqrt(cfg.r)
    A = np.vstack([sq * G, sr * np.eye(n)])
    rhs = np.concatenate([sq * (np.asarray(ref, dtype=float) - free),
                          np.zeros(n)])
    res = lsq_linear(A, rhs, bounds=(-cfg.u_max, cfg.u_max),
                     method="bvls", tol=1e-14)
    u0 = float(res.x[0])
    return min(max(u0, -cfg.u_max), cfg.u_max)


class PassthroughController:
    """Commands the reference force directly, clipped to the box constraint."""

    def __init__(self, u_max: float = 3.3):
        self.u_max = u_max

    def command(self, reference: float, stiffness: float = 0.0) -> float:
        return min(max(reference, -self.u_max), self.u_max)


class MpcForceController:
    """Receding-horizon force tracker keeping its own scalar force state."""

    def __init__(self, model: LpvModel, cfg: MpcConfig):
        self.model = model
        self.cfg = cfg
        self.x = 0.0

    def command(self, reference: float, stiffness: float = 0.0) -> float:
        u = mpc_step(self.model, self.x, [reference], self.cfg,
                     theta=stiffness)
        a = self.model.a(schedule_theta(stiffness, self.model))
        self.x = a * self.x + self.model.b * u
        return u
