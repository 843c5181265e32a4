"""Rendering units: schema handling, grouping, CLI exit codes."""

import numpy as np
import pytest

from figplots.cli import main
from figplots.render import (
    PlotJob,
    SchemaError,
    read_aggregates,
    read_trajectory,
    render,
    sweep_series,
)

TRAJ = "t,x1,x2,x3\n0,2,8,10\n0.01,2.1,8.1,9.99\n0.02,2.2,8.2,9.97\n"
AGG = (
    "mode,sigma,mean_delta,std_delta,divergence_fraction\n"
    "common,0,6.1,1.0,0\n"
    "common,2,0.35,0.05,0\n"
    "independent,0,6.2,inf,0.5\n"
)


@pytest.fixture
def traj_csv(tmp_path):
    path = tmp_path / "trajectory.csv"
    path.write_text(TRAJ)
    return str(path)


@pytest.fixture
def agg_csv(tmp_path):
    path = tmp_path / "aggregates.csv"
    path.write_text(AGG)
    return str(path)


class TestReaders:
    def test_trajectory_columns(self, traj_csv):
        data = read_trajectory(traj_csv)
        np.testing.assert_allclose(data["t"], [0.0, 0.01, 0.02])
        np.testing.assert_allclose(data["x3"], [10.0, 9.99, 9.97])

    def test_aggregates_parse_inf(self, agg_csv):
        rows = read_aggregates(agg_csv)
        assert rows[2]["std_delta"] == float("inf")
        assert rows[2]["divergence_fraction"] == 0.5

    def test_missing_column_diagnostics(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,x1,x2\n0,1,2\n")
        with pytest.raises(SchemaError) as err:
            read_trajectory(str(path))
        assert "x3" in str(err.value)

    def test_empty_file_yields_no_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert read_aggregates(str(path)) == []


class TestSweepSeries:
    def test_groups_and_sorts(self, agg_csv):
        series = sweep_series(read_aggregates(agg_csv))
        assert set(series) == {"common", "independent"}
        np.testing.assert_allclose(series["common"]["sigma"], [0.0, 2.0])
        np.testing.assert_allclose(series["common"]["mean"], [6.1, 0.35])

    def test_identical_input_identical_dataset(self, agg_csv):
        a = sweep_series(read_aggregates(agg_csv))
        b = sweep_series(read_aggregates(agg_csv))
        for mode in a:
            for key in a[mode]:
                np.testing.assert_array_equal(a[mode][key], b[mode][key])


class TestJobValidation:
    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaError):
            PlotJob(kind="histogram", inputs=["a.csv"], output="o.png")

    def test_needs_inputs(self):
        with pytest.raises(SchemaError):
            PlotJob(kind="attractor3d", inputs=[], output="o.png")


class TestCli:
    def test_attractor_renders(self, traj_csv, tmp_path):
        out = tmp_path / "fig.png"
        assert main(["attractor3d", traj_csv, "-o", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_timeseries_renders_overlay(self, traj_csv, tmp_path):
        out = tmp_path / "fig.png"
        assert main(["state_timeseries", traj_csv, traj_csv, "-o", str(out)]) == 0
        assert out.exists()

    def test_sweep_curves_render(self, agg_csv, tmp_path):
        out = tmp_path / "fig.png"
        assert main(["sweep_curves", agg_csv, "-o", str(out)]) == 0
        assert out.exists()

    def test_empty_sweep_gives_axes_only(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        out = tmp_path / "fig.png"
        assert main(["sweep_curves", str(empty), "-o", str(out)]) == 0
        assert out.exists()

    def test_schema_mismatch_exits_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        out = tmp_path / "fig.png"
        assert main(["sweep_curves", str(bad), "-o", str(out)]) == 1

    def test_missing_file_is_io_error(self, tmp_path):
        assert main(["attractor3d", "nope.csv", "-o", str(tmp_path / "f.png")]) == 2
