#!/usr/bin/env python3
"""Benchmark the compiled integration kernel against its pure-Python twin.

Runs the closed-loop benchmark scenario for a given number of steps on
every available backend and reports wall time per run and the speedup.

    python3 benchmarks/kernel_bench.py --steps 1000000 --repeats 3
"""

import argparse
import time

import numpy as np

from noiseaid import kernels
from noiseaid.chen import FEEDBACK_GAINS, ClosedLoopSpec, FeedbackVariant
from noiseaid.noise import CoherenceMode, DisturbanceSpec, correlated_increments
from noiseaid.sde import OVERFLOW_GUARD, TimeGrid


def run_once(loop, spec, grid, x0, aiding, dist):
    k1, k2, k3 = FEEDBACK_GAINS[spec.variant]
    states = np.empty((grid.n_steps + 1, 3))
    start = time.perf_counter()
    loop(
        x0,
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
    return time.perf_counter() - start, states


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=1_000_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    grid = TimeGrid(0.0, args.steps * 1e-4, 1e-4)
    spec = ClosedLoopSpec(
        variant=FeedbackVariant.WEAK32,
        disturbance=DisturbanceSpec.paper(),
        mode=CoherenceMode.COMMON,
    ).with_sigma(3.0)
    x0 = np.array([2.0, 8.0, 10.0])
    aiding, dist = correlated_increments(spec.mode, grid, 3, 3, seed=1)

    results = {}
    reference = None
    for name, loop in sorted(kernels.available_backends().items()):
        best = min(run_once(loop, spec, grid, x0, aiding, dist)[0] for _ in range(args.repeats))
        _, states = run_once(loop, spec, grid, x0, aiding, dist)
        if reference is None:
            reference = states
        else:
            assert np.array_equal(reference, states), "backends disagree"
        results[name] = best
        rate = args.steps / best / 1e6
        print(f"{name:9s} {best * 1e3:10.2f} ms / run   {rate:8.2f} Msteps/s")

    if "compiled" in results and "python" in results:
        print(f"speedup   {results['python'] / results['compiled']:10.1f} x")


if __name__ == "__main__":
    main()
