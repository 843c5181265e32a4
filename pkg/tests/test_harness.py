"""Experiment orchestration, sweeps, persistence, and config parsing."""

import json
import math
import os

import numpy as np
import pytest

from noiseaid import harness
from noiseaid.chen import ClosedLoopSpec, FeedbackVariant
from noiseaid.errors import ValidationError
from noiseaid.harness import (
    ExperimentSpec,
    SweepAggregate,
    SweepResult,
    SweepRow,
    cost_comparison,
    experiment_from_dict,
    intensity_sweep,
    read_aggregates_csv,
    run_scenario,
    run_trajectory,
    threshold_from_sweep,
    write_aggregates_csv,
    write_report_json,
    write_sweep_csv,
    write_trajectory_csv,
)
from noiseaid.metrics import MetricWindow
from noiseaid.noise import CoherenceMode, DisturbanceSpec
from noiseaid.sde import TimeGrid


@pytest.fixture
def small_spec():
    return ExperimentSpec(
        closed_loop=ClosedLoopSpec(
            variant=FeedbackVariant.FULL31,
            disturbance=DisturbanceSpec.paper(),
            mode=CoherenceMode.COMMON,
        ),
        grid=TimeGrid(0.0, 0.2, 1e-3),
        seeds=(1, 2),
    )


class TestRunScenario:
    def test_deterministic_per_seed(self, small_spec):
        a = run_trajectory(small_spec, 3)
        b = run_trajectory(small_spec, 3)
        np.testing.assert_array_equal(a.states, b.states)

    def test_metrics_attached(self, small_spec):
        res = run_scenario(small_spec, 1)
        assert math.isfinite(res.delta) and res.delta > 0
        assert math.isfinite(res.psi) and res.psi > 0
        assert math.isfinite(res.decay_rate)

    def test_default_window_spans_trajectory(self, small_spec):
        w = small_spec.metric_window()
        assert (w.start_index, w.end_index) == (0, small_spec.grid.n_steps)

    def test_needs_seeds(self, small_spec):
        with pytest.raises(ValidationError):
            ExperimentSpec(closed_loop=small_spec.closed_loop, seeds=())


class TestSweep:
    def test_rows_cover_product_and_are_sorted(self, small_spec):
        result = intensity_sweep(
            small_spec,
            [CoherenceMode.COMMON, CoherenceMode.INDEPENDENT],
            [0.0, 1.0],
            seeds=(1, 2),
        )
        assert len(result.rows) == 8
        keys = [(r.mode, r.sigma, r.seed) for r in result.rows]
        assert keys == sorted(keys)

    def test_parallel_matches_serial(self, small_spec):
        serial = intensity_sweep(small_spec, [CoherenceMode.COMMON], [0.0, 1.0], (1, 2), jobs=1)
        parallel = intensity_sweep(small_spec, [CoherenceMode.COMMON], [0.0, 1.0], (1, 2), jobs=2)
        assert serial.rows == parallel.rows

    def test_empty_axes_rejected(self, small_spec):
        with pytest.raises(ValidationError):
            intensity_sweep(small_spec, [], [1.0])
        with pytest.raises(ValidationError):
            intensity_sweep(small_spec, [CoherenceMode.COMMON], [])

    def test_aggregate_lookup(self):
        rows = [SweepRow("common", 1.0, s, float(s), False) for s in (1, 2, 3)]
        result = SweepResult.from_rows(rows)
        agg = result.aggregate("common", 1.0)
        assert agg.mean_delta == pytest.approx(2.0)
        assert agg.divergence_fraction == 0.0
        with pytest.raises(ValidationError):
            result.aggregate("common", 9.0)

    def test_infinite_delta_propagates_to_aggregate(self):
        rows = [
            SweepRow("common", 1.0, 1, 2.0, False),
            SweepRow("common", 1.0, 2, math.inf, True),
        ]
        agg = SweepResult.from_rows(rows).aggregate("common", 1.0)
        assert agg.mean_delta == math.inf
        assert agg.divergence_fraction == 0.5


class TestThreshold:
    def _result(self, deltas, diverged=None):
        diverged = diverged or [False] * len(deltas)
        rows = [
            SweepRow("common", 0.5 * i, 1, d, dv)
            for i, (d, dv) in enumerate(zip(deltas, diverged))
        ]
        return SweepResult.from_rows(rows)

    def test_all_below_gives_first_point(self):
        assert threshold_from_sweep(self._result([0.1, 0.2, 0.3]), "common", 1.0) == 0.0

    def test_all_above_gives_inf(self):
        assert threshold_from_sweep(self._result([5.0, 6.0]), "common", 1.0) == math.inf

    def test_crossing_point(self):
        assert threshold_from_sweep(self._result([5.0, 2.0, 0.5, 0.4]), "common", 1.0) == 1.0

    def test_diverged_runs_disqualify(self):
        result = self._result([0.1, 0.2], diverged=[True, False])
        assert threshold_from_sweep(result, "common", 1.0) == 0.5

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValidationError):
            threshold_from_sweep(self._result([1.0]), "independent", 1.0)


class TestCostComparison:
    def test_requires_matched_setup(self, small_spec):
        import dataclasses

        other = dataclasses.replace(small_spec, seeds=(5,))
        with pytest.raises(ValidationError):
            cost_comparison(small_spec, other)
        other = dataclasses.replace(small_spec, grid=TimeGrid(0.0, 0.1, 1e-3))
        with pytest.raises(ValidationError):
            cost_comparison(small_spec, other)

    def test_returns_mean_costs(self, small_spec):
        import dataclasses

        aided = dataclasses.replace(
            small_spec, closed_loop=small_spec.closed_loop.with_sigma(1.0)
        )
        unaided_psi, aided_psi = cost_comparison(small_spec, aided)
        assert unaided_psi > 0 and aided_psi > 0
        assert aided_psi != unaided_psi


class TestPersistence:
    def test_sweep_csv_round_trip(self, tmp_path):
        rows = [
            SweepRow("common", 0.0, 1, 1.25, False),
            SweepRow("common", 0.5, 1, math.inf, True),
        ]
        result = SweepResult.from_rows(rows)
        sweep_path = tmp_path / "sweep.csv"
        agg_path = tmp_path / "agg.csv"
        write_sweep_csv(result, str(sweep_path))
        write_aggregates_csv(result, str(agg_path))
        text = sweep_path.read_text()
        assert "mode,sigma,seed,delta,diverged" in text
        assert "inf" in text
        back = read_aggregates_csv(str(agg_path))
        assert back == list(result.aggregates)

    def test_trajectory_csv_stride(self, tmp_path, small_spec):
        traj = run_trajectory(small_spec, 1)
        path = tmp_path / "traj.csv"
        write_trajectory_csv(traj, str(path), stride=10)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,x1,x2,x3"
        assert len(lines) == 1 + len(traj.states[::10])
        with pytest.raises(ValidationError):
            write_trajectory_csv(traj, str(path), stride=0)

    def test_report_json_sanitizes_nonfinite(self, tmp_path):
        path = tmp_path / "report.json"
        write_report_json({"a": math.inf, "b": [np.float64(1.5), math.nan]}, str(path))
        data = json.loads(path.read_text())
        assert data == {"a": "inf", "b": [1.5, "nan"]}


class TestConfigParsing:
    def test_full_round_trip(self):
        cfg = {
            "variant": "weak32",
            "sigma_c": 3,
            "mode": "common",
            "disturbance": {
                "sin_amplitudes": [1, 2, 0.5],
                "white_intensities": [0.5, 0.25, 1],
            },
            "grid": {"t0": 0.0, "tf": 1.0, "dt": 1e-3},
            "x0": [1, 1, 1],
            "seeds": [4, 5],
            "window": {"start_index": 10},
        }
        spec = experiment_from_dict(cfg)
        assert spec.closed_loop.variant is FeedbackVariant.WEAK32
        assert spec.closed_loop.sigma_c == (3.0, 3.0, 3.0)
        assert spec.closed_loop.disturbance == DisturbanceSpec.paper()
        assert spec.grid == TimeGrid(0.0, 1.0, 1e-3)
        assert spec.seeds == (4, 5)
        assert spec.window == MetricWindow(10, spec.grid.n_steps)

    def test_defaults(self):
        spec = experiment_from_dict({})
        assert spec.closed_loop.variant is FeedbackVariant.FULL31
        assert spec.x0 == (2.0, 8.0, 10.0)
        assert spec.grid == TimeGrid(0.0, 100.0, 1e-4)

    def test_bad_variant_rejected(self):
        with pytest.raises(ValidationError):
            experiment_from_dict({"variant": "nope"})
