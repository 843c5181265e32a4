"""Seeded Wiener increments and fixed-step Euler-Maruyama integration.

The integrator is the explicit Ito scheme

    x_{k+1} = x_k + drift(t_k, x_k, w(t_k)) * dt
                  + C(x_k) @ dB_c[k] + D(x_k) @ dB_d[k],

with dB ~ N(0, dt) increments supplied by the caller.  All drift and
diffusion coefficients are evaluated at the left endpoint t_k = t0 + k*dt.
Trajectories record the exact increments they consumed, so replaying a
recorded trajectory reproduces it bit for bit.

Randomness comes from counter-based Philox substreams.  Stream derivation
rule (version 1, do not change without bumping): substream ``i`` of run
seed ``s`` is ``Generator(Philox(SeedSequence([s, i])))``.  One substream
per noise channel makes parallel runs reproducible and order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from noiseaid.errors import ValidationError

#: Version of the seed -> substream derivation rule documented above.
STREAM_RULE_VERSION = 1

#: States with any component beyond this magnitude are flagged as diverged.
OVERFLOW_GUARD = 1e12


def substream(seed: int, index: int) -> np.random.Generator:
    """Return the ``index``-th independent Philox substream of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform integration grid on [t0, tf] with step dt."""

    t0: float
    tf: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.tf <= self.t0:
            raise ValidationError(f"need tf > t0, got t0={self.t0}, tf={self.tf}")
        if self.n_steps < 1:
            raise ValidationError("grid must contain at least one step")

    @property
    def n_steps(self) -> int:
        return round((self.tf - self.t0) / self.dt)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class SdeSystem:
    """Controlled SDE with n states, l aiding channels, p disturbance channels.

    ``drift(t, x, w)`` receives the deterministic disturbance sample
    ``w = deterministic_disturbance(t)``; the white disturbance part enters
    through ``disturbance_diffusion`` so the Ito discretization stays exact.
    ``aiding_diffusion(x)`` is the full matrix C(x) @ diag(sigma_c), and
    ``disturbance_diffusion(x)`` is D(x) @ diag(sigma_d).
    """

    n: int
    l: int
    p: int
    drift: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    aiding_diffusion: Callable[[np.ndarray], np.ndarray]
    disturbance_diffusion: Callable[[np.ndarray], np.ndarray]
    deterministic_disturbance: Callable[[float], np.ndarray]


@dataclass
class Trajectory:
    """A simulated path together with the noise increments it consumed."""

    grid: TimeGrid
    states: np.ndarray  # (n_steps + 1, n)
    aiding_increments: Optional[np.ndarray]  # (n_steps, l)
    disturbance_increments: Optional[np.ndarray]  # (n_steps, p)
    seed: Optional[int] = None
    diverged_at: Optional[int] = None

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None

    def times(self) -> np.ndarray:
        return self.grid.times()

    def valid_steps(self) -> int:
        """Index of the last finite recorded state."""
        if self.diverged_at is None:
            return self.states.shape[0] - 1
        return max(self.diverged_at - 1, 0)


def wiener_increments(grid: TimeGrid, dims: int, seed: int) -> np.ndarray:
    """Draw an (n_steps, dims) matrix of independent N(0, dt) increments.

    Column ``j`` comes from substream ``j`` of ``seed``, so identical
    (seed, grid, dims) calls are bit-identical and a column's samples do
    not depend on how many other columns are drawn.
    """
    if dims < 0:
        raise ValidationError(f"dims must be nonnegative, got {dims}")
    n = grid.n_steps
    out = np.empty((n, dims))
    scale = math.sqrt(grid.dt)
    for j in range(dims):
        out[:, j] = substream(seed, j).standard_normal(n) * scale
    return out


def _check_increments(name: str, inc: np.ndarray, n_steps: int, channels: int) -> np.ndarray:
    inc = np.asarray(inc, dtype=float)
    if inc.shape != (n_steps, channels):
        raise ValidationError(
            f"{name} increments have shape {inc.shape}, expected ({n_steps}, {channels})"
        )
    return inc


def euler_maruyama(
    system: SdeSystem,
    x0: np.ndarray,
    grid: TimeGrid,
    aiding_inc: np.ndarray,
    disturbance_inc: np.ndarray,
    seed: Optional[int] = None,
) -> Trajectory:
    """Integrate ``system`` from ``x0`` consuming the supplied increments.

    Stops early (setting ``diverged_at``) as soon as a state component is
    non-finite or exceeds :data:`OVERFLOW_GUARD`; the remaining rows are
    filled with NaN rather than propagating infinities.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.n,):
        raise ValidationError(f"x0 has shape {x0.shape}, expected ({system.n},)")
    aiding_inc = _check_increments("aiding", aiding_inc, grid.n_steps, system.l)
    disturbance_inc = _check_increments("disturbance", disturbance_inc, grid.n_steps, system.p)

    n_steps = grid.n_steps
    states = np.empty((n_steps + 1, system.n))
    states[0] = x0
    diverged_at = None

    x = x0.copy()
    for k in range(n_steps):
        t = grid.t0 + k * grid.dt
        w = system.deterministic_disturbance(t)
        x = (
            x
            + system.drift(t, x, w) * grid.dt
            + system.aiding_diffusion(x) @ aiding_inc[k]
            + system.disturbance_diffusion(x) @ disturbance_inc[k]
        )
        states[k + 1] = x
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > OVERFLOW_GUARD:
            diverged_at = k + 1
            states[k + 2 :] = np.nan
            break

    return Trajectory(
        grid=grid,
        states=states,
        aiding_increments=aiding_inc,
        disturbance_increments=disturbance_inc,
        seed=seed,
        diverged_at=diverged_at,
    )


def replay(system: SdeSystem, x0: np.ndarray, traj: Trajectory) -> Trajectory:
    """Re-integrate using the increments recorded in ``traj``."""
    if traj.aiding_increments is None or traj.disturbance_increments is None:
        raise ValidationError("trajectory carries no recorded increments")
    return euler_maruyama(
        system, x0, traj.grid, traj.aiding_increments, traj.disturbance_increments, seed=traj.seed
    )
