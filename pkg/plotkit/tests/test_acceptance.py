"""Secondary acceptance: render every figure kind from real simulator runs.

The simulator is driven through its command-line interface only; the run
directories are consumed through the documented CSV schemas.
"""

import subprocess
import sys

import numpy as np
import pytest

from plotkit.figures import PlotJob, render
from plotkit.runs import load_run


def _simulate(out_dir, *args):
    cmd = [sys.executable, "-m", "flockform", "run", *args,
           "--cadence", "4", "--out", str(out_dir)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="module")
def bird_run(tmp_path_factory):
    return _simulate(tmp_path_factory.mktemp("bird"), "bird")


@pytest.fixture(scope="module")
def rings_run(tmp_path_factory):
    return _simulate(tmp_path_factory.mktemp("rings"), "rings")


def test_renders_all_five_kinds(bird_run, rings_run, tmp_path):
    outputs = []
    for kind in ("trajectories2d", "positions-vs-time", "energies", "min-distance"):
        out = tmp_path / f"bird-{kind}.png"
        render(PlotJob(run_dir=str(bird_run), kind=kind, output=str(out)))
        outputs.append(out)
    out = tmp_path / "rings-snapshot3d.png"
    render(PlotJob(run_dir=str(rings_run), kind="snapshot3d", output=str(out),
                   snapshot_times=(0.0, 0.5, 5.0, 200.0)))
    outputs.append(out)
    out = tmp_path / "rings-energies.png"
    render(PlotJob(run_dir=str(rings_run), kind="energies", output=str(out)))
    outputs.append(out)
    for path in outputs:
        assert path.stat().st_size > 1000, path


@pytest.mark.parametrize("fixture", ["bird_run", "rings_run"])
def test_total_energy_decays_monotonically(fixture, request):
    run = load_run(request.getfixturevalue(fixture))
    E = run.diag["E1"] + run.diag["E2"]
    assert np.all(np.diff(E) <= 1e-9 * (1.0 + E[0]))
    assert E[-1] < 0.01 * E[0]
