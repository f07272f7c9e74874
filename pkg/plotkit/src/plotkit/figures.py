"""Figure rendering for flockform runs.

Five figure kinds reproduce the standard views of a run: planar
trajectories, positions over time, the energy/dissipation decomposition,
the minimum inter-agent distance with a zoom inset, and 3D snapshots with
velocity vectors.  Rendering is deterministic: fixed style, fixed dpi, no
timestamps, so identical inputs produce identical image files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runs import RunData, load_run

FIGURE_KINDS = ("trajectories2d", "positions-vs-time", "energies",
                "min-distance", "snapshot3d")

_DPI = 130


@dataclass
class PlotJob:
    """One rendering request: a run directory, a figure kind, an output path."""

    run_dir: str
    kind: str
    output: str
    snapshot_times: tuple = field(default_factory=tuple)   # snapshot3d only

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choose from {FIGURE_KINDS}")


def render(job: PlotJob) -> Path:
    """Render one figure; returns the written path."""
    run = load_run(job.run_dir)
    fig = _FIGURES[job.kind](run, job)
    out = Path(job.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=_DPI, metadata=_strip_metadata(out.suffix))
    plt.close(fig)
    return out


def _strip_metadata(suffix):
    # PNG files carry a Software tag by default; pin it so bytes never vary
    if suffix.lower() == ".png":
        return {"Software": "plotkit"}
    if suffix.lower() == ".svg":
        return {"Date": None}
    return None


def _agent_colors(n):
    cmap = plt.get_cmap("viridis")
    return [cmap(i / max(n - 1, 1)) for i in range(n)]


def _fig_trajectories2d(run: RunData, job: PlotJob):
    if run.d < 2:
        raise ValueError("trajectories2d needs at least two spatial dimensions")
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    colors = _agent_colors(run.n)
    for i in range(run.n):
        ax.plot(run.x[:, i, 0], run.x[:, i, 1], color=colors[i], lw=0.8)
    ax.scatter(run.x[0, :, 0], run.x[0, :, 1], marker="x", c="k", s=30,
               label="initial", zorder=3)
    ax.scatter(run.x[-1, :, 0], run.x[-1, :, 1], marker="s", facecolors="none",
               edgecolors="k", s=36, label="final", zorder=3)
    tg = run.targets()
    ax.scatter(tg[:, 0], tg[:, 1], marker="o", facecolors="none",
               edgecolors="tab:red", s=46, label="target pattern", zorder=3)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("agent trajectories")
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    return fig


def _fig_positions_vs_time(run: RunData, job: PlotJob):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    colors = _agent_colors(run.n)
    for i in range(run.n):
        ax.plot(run.t, run.x[:, i, 0], color=colors[i], lw=1.0, label=f"agent {i}")
    ax.set_xlabel("t")
    ax.set_ylabel("position" if run.d == 1 else "first coordinate")
    ax.set_title("positions over time")
    if run.n <= 8:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def _fig_energies(run: RunData, job: PlotJob):
    t = run.diag["t"]
    E1, E2, D = run.diag["E1"], run.diag["E2"], run.diag["D"]
    fig, (left, right) = plt.subplots(1, 2, figsize=(9.0, 3.8))
    left.plot(t, E1, label="E1 (kinetic)", lw=1.2)
    left.plot(t, E2, label="E2 (control)", lw=1.2)
    left.plot(t, E1 + E2, label="E1 + E2", lw=1.6, color="k")
    left.set_xlabel("t")
    left.set_ylabel("energy")
    left.set_title("energies")
    left.legend(fontsize=8)
    right.plot(t, D, color="tab:red", lw=1.2)
    right.set_xlabel("t")
    right.set_ylabel("D")
    right.set_title("dissipation")
    fig.tight_layout()
    return fig


def _fig_min_distance(run: RunData, job: PlotJob):
    t, md = run.diag["t"], run.diag["min_dist"]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(t, md, lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("min pairwise distance")
    ax.set_title("collision monitor")
    ax.set_ylim(bottom=0.0)
    k = int(np.argmin(md))
    if 0 < k < md.size - 1 and t[-1] > t[0]:
        # zoom inset around the global minimum
        span = 0.08 * (t[-1] - t[0])
        lo, hi = max(t[0], t[k] - span), min(t[-1], t[k] + span)
        sel = (t >= lo) & (t <= hi)
        inset = ax.inset_axes([0.52, 0.52, 0.43, 0.4])
        inset.plot(t[sel], md[sel], lw=1.0)
        inset.scatter([t[k]], [md[k]], s=12, color="tab:red", zorder=3)
        inset.set_title("around the minimum", fontsize=7)
        inset.tick_params(labelsize=6)
        ax.indicate_inset_zoom(inset, edgecolor="gray")
    fig.tight_layout()
    return fig


def _fig_snapshot3d(run: RunData, job: PlotJob):
    times = job.snapshot_times or (run.t[0], run.t[-1])
    cols = len(times)
    fig = plt.figure(figsize=(4.0 * cols, 3.8))
    tg = run.targets()
    for c, when in enumerate(times):
        k = run.nearest_sample(float(when))
        ax = fig.add_subplot(1, cols, c + 1, projection="3d")
        x = run.x[k]
        v = run.v[k]
        if run.d == 2:  # lift planar data into the x3 = 0 plane
            x = np.hstack([x, np.zeros((run.n, 1))])
            v = np.hstack([v, np.zeros((run.n, 1))])
        elif run.d != 3:
            raise ValueError("snapshot3d needs two- or three-dimensional data")
        speed = float(np.max(np.linalg.norm(v, axis=1)))
        scale = 0.0 if speed == 0 else 0.8 / speed
        ax.scatter(x[:, 0], x[:, 1], x[:, 2], s=14, c="tab:blue", depthshade=False)
        if scale > 0:
            ax.quiver(x[:, 0], x[:, 1], x[:, 2],
                      v[:, 0] * scale, v[:, 1] * scale, v[:, 2] * scale,
                      color="tab:blue", lw=0.7, arrow_length_ratio=0.25)
        t3 = tg if tg.shape[1] == 3 else np.hstack([tg, np.zeros((tg.shape[0], 1))])
        ax.scatter(t3[:, 0], t3[:, 1], t3[:, 2], marker="o", facecolors="none",
                   edgecolors="tab:red", s=30, depthshade=False)
        ax.set_title(f"t = {run.t[k]:g}", fontsize=9)
        ax.tick_params(labelsize=6)
    fig.tight_layout()
    return fig


_FIGURES = {
    "trajectories2d": _fig_trajectories2d,
    "positions-vs-time": _fig_positions_vs_time,
    "energies": _fig_energies,
    "min-distance": _fig_min_distance,
    "snapshot3d": _fig_snapshot3d,
}
