"""Quantitative measures over simulated trajectories.

* deviation -- time-averaged squared state norm after control onset,
  delta = sum_{i=Nc}^{N} ||x_i||^2 / (N - Nc + 1);
* control cost -- time-averaged squared magnitude of the applied feedback
  plus injected-noise signals,
  psi = (1/(t-tc)) * integral of ||G(x)k(x)||^2 + ||C(x) sigma_c dB/dt||^2;
* decay rate -- least-squares slope of log||P^(1/2) x(t)||, the empirical
  counterpart of the almost-sure Lyapunov exponent bound.

The cost's noise term uses the increments the trajectory actually
consumed (the cost of the control signal that was applied), sampled as
dB/dt; its magnitude is therefore dt-dependent by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from noiseaid.chen import ClosedLoopSpec, chen_matrices, feedback
from noiseaid.errors import ValidationError
from noiseaid.sde import Trajectory


@dataclass(frozen=True)
class MetricWindow:
    """Inclusive state-index window [start_index, end_index]."""

    start_index: int
    end_index: int

    def __post_init__(self):
        if not 0 <= self.start_index <= self.end_index:
            raise ValidationError(
                f"need 0 <= start <= end, got [{self.start_index}, {self.end_index}]"
            )

    @property
    def count(self) -> int:
        return self.end_index - self.start_index + 1


def deviation(traj: Trajectory, window: MetricWindow) -> float:
    """Mean squared state norm over the window; +inf if the trajectory
    diverged inside it."""
    if window.end_index >= traj.states.shape[0]:
        raise ValidationError(
            f"window end {window.end_index} exceeds trajectory length {traj.states.shape[0] - 1}"
        )
    if traj.diverged_at is not None and traj.diverged_at <= window.end_index:
        return math.inf
    block = traj.states[window.start_index : window.end_index + 1]
    return float(np.mean(np.sum(block * block, axis=1)))


def control_cost(
    traj: Trajectory, spec: ClosedLoopSpec, t_c: float, t_end: float
) -> float:
    """Time-averaged squared control effort over [t_c, t_end]."""
    grid = traj.grid
    if traj.aiding_increments is None:
        raise ValidationError("trajectory carries no recorded aiding increments")
    if not grid.t0 <= t_c < t_end <= grid.tf + 1e-12:
        raise ValidationError(f"cost window [{t_c}, {t_end}] outside trajectory span")
    k_start = round((t_c - grid.t0) / grid.dt)
    k_end = round((t_end - grid.t0) / grid.dt)
    if traj.diverged_at is not None and traj.diverged_at <= k_end:
        return math.inf

    _A0, _f0, _D0, G, _C = chen_matrices(spec.params)
    sigma_c = np.asarray(spec.sigma_c, dtype=float)
    dt = grid.dt
    xs = traj.states[k_start:k_end]
    inc = traj.aiding_increments[k_start:k_end]

    # feedback term ||G(x)k(x)||^2, vectorized over the window
    k1, k2, k3 = _feedback_signals(spec, xs)
    u1 = xs[:, 0] * k1 - spec.params.a * xs[:, 0] * k3
    u2 = xs[:, 1] * k1 + spec.params.c * k2
    u3 = (2.0 / 3.0) * xs[:, 2] * k1 - spec.params.b * xs[:, 2] * k3
    feedback_sq = u1 * u1 + u2 * u2 + u3 * u3

    # injected-noise term ||diag(x) sigma_c (dB/dt)||^2
    noise_vec = xs * sigma_c * (inc / dt)
    noise_sq = np.sum(noise_vec * noise_vec, axis=1)

    total = float(np.sum(feedback_sq + noise_sq)) * dt
    return total / (t_end - t_c)


def _feedback_signals(spec: ClosedLoopSpec, xs: np.ndarray):
    """Vectorized feedback components over an array of states."""
    from noiseaid.chen import FEEDBACK_GAINS

    kap1, kap2, kap3 = FEEDBACK_GAINS[spec.variant]
    rho = 0.5 * np.linalg.norm(xs, axis=1)
    return -kap1 * rho, -kap2 * (xs[:, 0] + xs[:, 1]), np.full(xs.shape[0], -kap3)


def decay_rate(traj: Trajectory, P: np.ndarray, t_min: float) -> float:
    """Least-squares slope of log||P^(1/2) x(t)|| over [t_min, end].

    Uses the finite (pre-divergence) part of the trajectory.  Returns
    -inf if the state hits exact zero in the fitted range.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    last = traj.valid_steps()
    xs = traj.states[: last + 1]
    t = traj.times()[: last + 1]
    mask = t >= t_min
    if np.count_nonzero(mask) < 2:
        raise ValidationError("fewer than two trajectory samples at or after t_min")
    xs = xs[mask]
    t = t[mask]
    quad = np.einsum("ij,jk,ik->i", xs, P, xs)
    if np.any(quad <= 0.0):
        return -math.inf
    y = 0.5 * np.log(quad)
    slope = np.polyfit(t, y, 1)[0]
    return float(slope)
