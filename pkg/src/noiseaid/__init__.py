"""Toolkit for white-noise-aided stabilization of perturbed systems.

Simulates controlled stochastic differential equations under weakened
state feedback plus multiplicative aiding noise, checks the matrix
sufficient conditions for input-to-state stability, and reproduces the
deviation / cost / noise-coherence experiments on the chaotic Chen
benchmark.
"""

from noiseaid.errors import ValidationError
from noiseaid.sde import SdeSystem, TimeGrid, Trajectory, euler_maruyama, wiener_increments
from noiseaid.noise import CoherenceMode, DisturbanceSpec, correlated_increments, disturbance_value
from noiseaid.chen import (
    ChenParams,
    ClosedLoopSpec,
    FeedbackVariant,
    build_closed_loop,
    chen_matrices,
    clf_bound,
    feedback,
    rho,
    simulate_closed_loop,
)
from noiseaid.metrics import MetricWindow, control_cost, decay_rate, deviation

__version__ = "0.1.0"

__all__ = [
    "ValidationError",
    "SdeSystem",
    "TimeGrid",
    "Trajectory",
    "euler_maruyama",
    "wiener_increments",
    "CoherenceMode",
    "DisturbanceSpec",
    "correlated_increments",
    "disturbance_value",
    "ChenParams",
    "ClosedLoopSpec",
    "FeedbackVariant",
    "build_closed_loop",
    "chen_matrices",
    "clf_bound",
    "feedback",
    "rho",
    "simulate_closed_loop",
    "MetricWindow",
    "control_cost",
    "decay_rate",
    "deviation",
]
