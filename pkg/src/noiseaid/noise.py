"""Correlated Wiener-increment blocks and composite disturbance signals.

Four coherence structures are supported for the aiding / disturbance
channel blocks:

* ``totally_symmetric`` -- one base stream broadcast to every aiding and
  every disturbance column (the full (l+p)-column block has rank 1);
* ``common`` -- one stream shared by all aiding columns, disturbance
  columns independent;
* ``independent`` -- every column its own stream;
* ``asymmetric`` -- aiding columns (w, -w, -w) from one stream (defined
  for exactly three aiding channels), disturbance columns independent.

Substream assignment is fixed per mode so that stream 0's samples are
identical across modes for a given seed: changing the mode changes only
the correlation structure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from noiseaid.errors import ValidationError
from noiseaid.sde import TimeGrid, substream


class CoherenceMode(enum.Enum):
    """Correlation structure among aiding and disturbance Wiener channels."""

    TOTALLY_SYMMETRIC = "totally_symmetric"
    COMMON = "common"
    INDEPENDENT = "independent"
    ASYMMETRIC = "asymmetric"

    @classmethod
    def from_name(cls, name: str) -> "CoherenceMode":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown coherence mode {name!r}; expected one of {valid}")


@dataclass(frozen=True)
class DisturbanceSpec:
    """Disturbance components w_j(t) = sin_amplitudes[j]*sin(t) + white part.

    ``white_intensities`` is the diagonal of sigma_d; the white part enters
    the integrator as multiplicative diffusion, not through the drift.
    """

    sin_amplitudes: Tuple[float, ...]
    white_intensities: Tuple[float, ...]

    def __post_init__(self):
        if len(self.sin_amplitudes) != len(self.white_intensities):
            raise ValidationError("amplitude and intensity vectors must have equal length")
        if any(s < 0 for s in self.white_intensities):
            raise ValidationError("white intensities must be nonnegative")

    @property
    def p(self) -> int:
        return len(self.sin_amplitudes)

    @classmethod
    def none(cls, p: int = 3) -> "DisturbanceSpec":
        return cls((0.0,) * p, (0.0,) * p)

    @classmethod
    def paper(cls) -> "DisturbanceSpec":
        """The benchmark disturbances w = (sin t, 2 sin t, 0.5 sin t) plus
        white parts of intensity (0.5, 0.25, 1)."""
        return cls((1.0, 2.0, 0.5), (0.5, 0.25, 1.0))


def disturbance_value(spec: DisturbanceSpec, t: float, white_sample: np.ndarray) -> np.ndarray:
    """Evaluate the composite disturbance at time ``t``.

    ``white_sample`` is the white-noise sample dB/dt at the current step.
    """
    white_sample = np.asarray(white_sample, dtype=float)
    return np.asarray(spec.sin_amplitudes) * math.sin(t) + np.asarray(
        spec.white_intensities
    ) * white_sample


def correlated_increments(
    mode: CoherenceMode, grid: TimeGrid, l: int, p: int, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw the (aiding, disturbance) increment blocks for one run.

    Every column is marginally N(0, dt); the joint structure follows
    ``mode``.  Substreams: index 0 is always the base aiding stream;
    disturbance streams follow (1..p for the shared-aiding modes,
    l..l+p-1 for independent).
    """
    if l < 0 or p < 0:
        raise ValidationError("channel counts must be nonnegative")
    if mode is CoherenceMode.ASYMMETRIC and l != 3:
        raise ValidationError(f"asymmetric mode is defined for l=3 aiding channels, got l={l}")

    n = grid.n_steps
    scale = math.sqrt(grid.dt)

    def draw(index: int) -> np.ndarray:
        return substream(seed, index).standard_normal(n) * scale

    aiding = np.empty((n, l))
    disturbance = np.empty((n, p))

    if mode is CoherenceMode.TOTALLY_SYMMETRIC:
        w = draw(0)
        for i in range(l):
            aiding[:, i] = w
        for j in range(p):
            disturbance[:, j] = w
    elif mode is CoherenceMode.COMMON:
        w = draw(0)
        for i in range(l):
            aiding[:, i] = w
        for j in range(p):
            disturbance[:, j] = draw(1 + j)
    elif mode is CoherenceMode.INDEPENDENT:
        for i in range(l):
            aiding[:, i] = draw(i)
        for j in range(p):
            disturbance[:, j] = draw(l + j)
    else:  # ASYMMETRIC, l == 3
        w = draw(0)
        aiding[:, 0] = w
        aiding[:, 1] = -w
        aiding[:, 2] = -w
        for j in range(p):
            disturbance[:, j] = draw(1 + j)

    return aiding, disturbance
