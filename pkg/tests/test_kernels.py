"""Compiled kernel vs pure-Python twin: selection and bit-equality."""

import os
import subprocess
import sys

import numpy as np
import pytest

from noiseaid import kernels
from noiseaid.chen import ClosedLoopSpec, FeedbackVariant
from noiseaid.noise import CoherenceMode, DisturbanceSpec, correlated_increments
from noiseaid.sde import OVERFLOW_GUARD, TimeGrid


def _run_backend(loop, spec, grid, x0, aiding, dist):
    from noiseaid.chen import FEEDBACK_GAINS

    k1, k2, k3 = FEEDBACK_GAINS[spec.variant]
    states = np.empty((grid.n_steps + 1, 3))
    flag = loop(
        np.ascontiguousarray(x0, dtype=float),
        grid.t0,
        grid.dt,
        spec.params.a,
        spec.params.b,
        spec.params.c,
        k1,
        k2,
        k3,
        np.asarray(spec.sigma_c, dtype=float),
        np.asarray(spec.disturbance.sin_amplitudes, dtype=float),
        np.asarray(spec.disturbance.white_intensities, dtype=float),
        np.asarray(spec.disturbance_signs(), dtype=float),
        aiding,
        dist,
        states,
        OVERFLOW_GUARD,
    )
    return flag, states


def test_backend_registered():
    backends = kernels.available_backends()
    assert "python" in backends
    assert kernels.BACKEND in backends


def test_compiled_backend_present():
    # the build is expected to produce the extension in this repository
    assert "compiled" in kernels.available_backends()


@pytest.mark.skipif(
    "compiled" not in kernels.available_backends(), reason="extension not built"
)
@pytest.mark.parametrize("sigma", [0.0, 3.0])
def test_backends_bit_identical(sigma):
    spec = ClosedLoopSpec(
        variant=FeedbackVariant.WEAK32,
        disturbance=DisturbanceSpec.paper(),
        mode=CoherenceMode.COMMON,
    ).with_sigma(sigma)
    grid = TimeGrid(0.0, 0.5, 1e-4)
    aiding, dist = correlated_increments(spec.mode, grid, 3, 3, seed=7)
    x0 = np.array([2.0, 8.0, 10.0])
    backends = kernels.available_backends()
    flag_py, states_py = _run_backend(backends["python"], spec, grid, x0, aiding, dist)
    flag_c, states_c = _run_backend(backends["compiled"], spec, grid, x0, aiding, dist)
    assert flag_py == flag_c
    np.testing.assert_array_equal(states_py, states_c)


@pytest.mark.skipif(
    "compiled" not in kernels.available_backends(), reason="extension not built"
)
def test_backends_agree_on_divergence():
    spec = ClosedLoopSpec(variant=FeedbackVariant.ZERO)
    grid = TimeGrid(0.0, 0.1, 1e-4)
    zeros = np.zeros((grid.n_steps, 3))
    x0 = np.array([1e11, 1e11, 1e11])
    backends = kernels.available_backends()
    flag_py, states_py = _run_backend(backends["python"], spec, grid, x0, zeros, zeros)
    flag_c, states_c = _run_backend(backends["compiled"], spec, grid, x0, zeros, zeros)
    assert flag_py == flag_c >= 0
    np.testing.assert_array_equal(states_py[: flag_py + 1], states_c[: flag_c + 1])


def test_env_override_selects_python():
    code = (
        "import noiseaid.kernels as k\n"
        "print(k.BACKEND)\n"
    )
    env = dict(os.environ, NOISEAID_PURE_PY="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"
