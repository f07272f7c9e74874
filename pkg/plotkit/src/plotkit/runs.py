"""Loading and schema validation for flockform run directories.

A run directory holds four CSV files, documented in the simulator's README:

    states.csv       t, x_0_0 .. x_{n-1}_{d-1}, v_0_0 .. v_{n-1}_{d-1}
    diagnostics.csv  t, E1, E2, D, v_diameter, x_diameter, min_dist, pattern_error
    events.csv       kind, t, i, j, min_distance
    formation.csv    i, z_0 .. z_{d-1}

Every loader checks the header against the schema and reports the first
offending column by name and position.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

DIAG_COLUMNS = ("t", "E1", "E2", "D", "v_diameter", "x_diameter",
                "min_dist", "pattern_error")
EVENT_COLUMNS = ("kind", "t", "i", "j", "min_distance")


class SchemaError(ValueError):
    """A CSV file does not match the documented run-directory schema."""


@dataclass
class RunData:
    """One loaded run: state samples, diagnostics, events, chain offsets."""

    t: np.ndarray        # (N,)
    x: np.ndarray        # (N, n, d)
    v: np.ndarray        # (N, n, d)
    diag: dict           # column name -> (N,) array
    events: list         # dicts with kind, t, i, j, min_distance
    z: np.ndarray        # (n-1, d)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def d(self) -> int:
        return self.x.shape[2]

    def targets(self, anchor_to_final: bool = True) -> np.ndarray:
        """Positions realizing the chain offsets exactly.

        The pattern is determined up to translation; by default it is
        anchored so its centroid matches the final sample's centroid,
        which is where a converged swarm actually lands.
        """
        pts = np.vstack([np.zeros((1, self.d)), np.cumsum(-self.z, axis=0)])
        if anchor_to_final:
            pts = pts + (self.x[-1].mean(axis=0) - pts.mean(axis=0))
        return pts

    def nearest_sample(self, time: float) -> int:
        return int(np.argmin(np.abs(self.t - time)))


def _read_rows(path: Path):
    lines = path.read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path.name}: file is empty")
    header = [c.strip() for c in lines[0].split(",")]
    rows = [line.split(",") for line in lines[1:] if line.strip()]
    return header, rows


def _check_header(name, header, expected):
    for pos, (got, want) in enumerate(zip(header, expected)):
        if got != want:
            raise SchemaError(
                f"{name}: unexpected column {got!r} at position {pos} (expected {want!r})"
            )
    if len(header) != len(expected):
        extra = header[len(expected)] if len(header) > len(expected) else expected[len(header)]
        raise SchemaError(f"{name}: column count {len(header)} != {len(expected)} "
                          f"(around column {extra!r})")


def _state_layout(header):
    """Infer (n, d) from the states header and validate every column name."""
    if not header or header[0] != "t":
        got = header[0] if header else "<none>"
        raise SchemaError(f"states.csv: unexpected column {got!r} at position 0 (expected 't')")
    body = header[1:]
    if not body or not body[0].startswith("x_"):
        raise SchemaError("states.csv: expected x_0_0 at position 1")
    if len(body) % 2 != 0:
        raise SchemaError("states.csv: position and velocity blocks differ in size")
    half = len(body) // 2
    # dimension = number of leading x_0_* columns
    d = 0
    while d < half and body[d] == f"x_0_{d}":
        d += 1
    if d == 0 or half % d != 0:
        raise SchemaError(f"states.csv: unexpected column {body[0]!r} at position 1")
    n = half // d
    expected = (["t"]
                + [f"x_{i}_{k}" for i in range(n) for k in range(d)]
                + [f"v_{i}_{k}" for i in range(n) for k in range(d)])
    _check_header("states.csv", header, expected)
    return n, d


def load_run(run_dir) -> RunData:
    """Load and validate a complete run directory."""
    run_dir = Path(run_dir)

    header, rows = _read_rows(run_dir / "states.csv")
    n, d = _state_layout(header)
    data = np.array([[float(c) for c in row] for row in rows])
    if data.shape[1] != len(header):
        raise SchemaError("states.csv: a data row does not match the header width")
    t = data[:, 0]
    x = data[:, 1:1 + n * d].reshape(-1, n, d)
    v = data[:, 1 + n * d:].reshape(-1, n, d)

    header, rows = _read_rows(run_dir / "diagnostics.csv")
    _check_header("diagnostics.csv", header, DIAG_COLUMNS)
    dmat = np.array([[float(c) for c in row] for row in rows])
    diag = {name: dmat[:, i] for i, name in enumerate(DIAG_COLUMNS)}

    header, rows = _read_rows(run_dir / "events.csv")
    _check_header("events.csv", header, EVENT_COLUMNS)
    events = [
        {"kind": row[0], "t": float(row[1]), "i": int(row[2]), "j": int(row[3]),
         "min_distance": float(row[4])}
        for row in rows
    ]

    header, rows = _read_rows(run_dir / "formation.csv")
    _check_header("formation.csv", header, ["i"] + [f"z_{k}" for k in range(d)])
    z = np.array([[float(c) for c in row[1:]] for row in rows])
    if z.shape != (n - 1, d):
        raise SchemaError(f"formation.csv: expected {n - 1} offsets of dimension {d}")

    return RunData(t=t, x=x, v=v, diag=diag, events=events, z=z)
