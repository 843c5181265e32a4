import subprocess
import sys

import pytest


def run_harness(args, cwd):
    """Invoke the noiseaid CLI; the plot layer only sees its CSV artifacts."""
    cmd = [sys.executable, "-m", "noiseaid.cli"] + args
    proc = subprocess.run(cmd, cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Generate one round of harness CSVs for every bundled preset.

    Single-trajectory presets run on a shortened horizon and sweeps on a
    reduced sigma grid to keep the suite quick; the CSV schemas are
    identical to full runs.
    """
    root = tmp_path_factory.mktemp("artifacts")
    for preset in ("fig2", "fig3", "fig4", "fig5b"):
        run_harness(
            ["simulate", "--config", preset, "--out", str(root), "--set", "grid.tf=2.0"],
            cwd=str(root),
        )
    run_harness(
        [
            "sweep",
            "--config",
            "fig5a",
            "--out",
            str(root),
            "--set",
            "sigma_grid=[0,2,3]",
            "--set",
            "seeds=[1,2]",
        ],
        cwd=str(root),
    )
    # fig6 keeps the full seed list so the per-mode threshold ordering is
    # the one the acceptance data establishes; the sigma grid is thinned.
    run_harness(
        [
            "sweep",
            "--config",
            "fig6",
            "--out",
            str(root),
            "--set",
            "sigma_grid=[0,4,5,6]",
        ],
        cwd=str(root),
    )
    return root
