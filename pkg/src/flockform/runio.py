"""Run configuration, CSV persistence, and summaries.

The configuration format is plain ``key = value`` text, one pair per line,
``#`` comments allowed.  Unknown keys are rejected outright: a silently
ignored typo in an exponent would invalidate whatever conclusion the run was
meant to support.  Floating values are serialized with 17 significant digits
everywhere, so a written summary re-parses to bit-identical doubles and the
resolved configuration embedded in it reproduces the run exactly.

A run directory contains states.csv, diagnostics.csv, events.csv,
formation.csv, and summary.txt; the schemas are documented in README.md and
consumed by the plotting package.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import CertificateReport, certify
from .integrate import (
    EVENT_NEAR_COLLISION,
    EVENT_NUMERICAL_COLLISION,
    EVENT_STEP_FLOOR,
    IntegratorConfig,
    STATUS_COMPLETED,
    Trajectory,
)
from .model import KERNELS, FormationSpec, ModelParams, SwarmState
from .scenarios import SCENARIO_BUILDERS, ScenarioSpec, build_scenario

OUTPUT_ROOT_ENV = "FLOCKFORM_RUNS"

_SCENARIO_ARG_KEYS = {"n": int, "radius": float, "seed": int, "swapped": bool}
_MODEL_KEYS = {"K": float, "M": float, "alpha": float, "beta": float,
               "kernel": str, "delta": float}
_INTEGRATOR_KEYS = {"method": str, "dt_init": float, "rel_tol": float,
                    "abs_tol": float, "dt_min": float, "collision_eps": float,
                    "near_eps": float, "t_end": float, "max_steps": int}
_OUTPUT_KEYS = {"output_dir": str, "cadence": int, "formats": str}
_INLINE_KEYS = {"d": int, "x": "vectors", "v": "vectors", "z": "vectors"}


class ConfigError(ValueError):
    """A configuration document could not be parsed or validated."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column


@dataclass
class RunConfig:
    """A parsed configuration: scenario selection plus typed overrides."""

    scenario: str
    scenario_args: dict = field(default_factory=dict)
    model_overrides: dict = field(default_factory=dict)
    integrator_overrides: dict = field(default_factory=dict)
    inline: dict = field(default_factory=dict)      # d, x, v, z for scenario = inline
    output_dir: str | None = None
    cadence: int = 1
    formats: tuple = ("csv", "summary")


def fmt(value: float) -> str:
    """17 significant digits: lossless double round-trip."""
    return format(float(value), ".17g")


def _parse_bool(raw, line):
    low = raw.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}", line)


def _parse_vectors(raw, line):
    """Rows like ``(a, b) (c, d)`` or bare numbers for one dimension."""
    raw = raw.strip()
    try:
        if "(" in raw:
            rows = []
            for chunk in raw.split(")"):
                chunk = chunk.strip().lstrip("(").strip()
                if not chunk:
                    continue
                rows.append(tuple(float(p) for p in chunk.replace(",", " ").split()))
            if not rows or len({len(r) for r in rows}) != 1:
                raise ValueError
            return np.array(rows)
        return np.array([[float(p)] for p in raw.replace(",", " ").split()])
    except ValueError:
        raise ConfigError(f"could not parse vector list {raw!r}", line) from None


def _convert(key, kind, raw, line):
    if kind is bool:
        return _parse_bool(raw, line)
    if kind == "vectors":
        return _parse_vectors(raw, line)
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
    except ValueError:
        raise ConfigError(
            f"key {key!r} expects a {kind.__name__}, got {raw!r}", line
        ) from None
    return raw.strip()


def parse_config(text: str) -> RunConfig:
    """Parse the documented key-value format into a RunConfig.

    Rejects malformed lines (with position), unknown keys, duplicate keys,
    and type mismatches.
    """
    values = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", lineno, 1)
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not key or not raw:
            raise ConfigError("expected 'key = value'", lineno, stripped.index("=") + 1)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        kind = (
            {"scenario": str} | _SCENARIO_ARG_KEYS | _MODEL_KEYS
            | _INTEGRATOR_KEYS | _OUTPUT_KEYS | _INLINE_KEYS
        ).get(key)
        if kind is None:
            raise ConfigError(f"unknown key {key!r}", lineno)
        values[key] = _convert(key, kind, raw, lineno)

    if "scenario" not in values:
        raise ConfigError("missing required key 'scenario'")
    scenario = values.pop("scenario")
    known = set(SCENARIO_BUILDERS) | {"inline"}
    if scenario not in known:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {sorted(known)}")

    cfg = RunConfig(scenario=scenario)
    for key, val in values.items():
        if key in _SCENARIO_ARG_KEYS:
            cfg.scenario_args[key] = val
        elif key in _MODEL_KEYS:
            if key == "kernel" and val not in KERNELS:
                raise ConfigError(f"unknown kernel {val!r}")
            cfg.model_overrides[key] = val
        elif key in _INTEGRATOR_KEYS:
            if key == "method" and val not in ("dopri45", "rk4"):
                raise ConfigError(f"unknown method {val!r}")
            cfg.integrator_overrides[key] = val
        elif key in _INLINE_KEYS:
            cfg.inline[key] = val
        elif key == "output_dir":
            cfg.output_dir = val
        elif key == "cadence":
            if val < 1:
                raise ConfigError("cadence must be >= 1")
            cfg.cadence = val
        elif key == "formats":
            parts = tuple(p.strip() for p in val.split(",") if p.strip())
            bad = set(parts) - {"csv", "summary"}
            if bad or not parts:
                raise ConfigError(f"formats must be drawn from csv, summary; got {val!r}")
            cfg.formats = parts

    if scenario == "inline":
        missing = {"x", "v", "z"} - set(cfg.inline)
        if missing:
            raise ConfigError(f"inline scenario needs keys {sorted(missing)}")
        if cfg.scenario_args:
            raise ConfigError(
                f"inline scenario does not accept {sorted(cfg.scenario_args)}"
            )
    elif cfg.inline:
        raise ConfigError(
            f"keys {sorted(cfg.inline)} are only valid for scenario = inline"
        )
    return cfg


def resolve_scenario(cfg: RunConfig) -> ScenarioSpec:
    """Build the scenario a config describes and apply its overrides."""
    try:
        if cfg.scenario == "inline":
            x, v, z = cfg.inline["x"], cfg.inline["v"], cfg.inline["z"]
            d = cfg.inline.get("d")
            if d is not None and x.shape[1] != d:
                raise ValueError(f"inline vectors are {x.shape[1]}-dimensional, d = {d}")
            spec = ScenarioSpec(
                name="inline",
                initial=SwarmState(0.0, x=x, v=v),
                formation=FormationSpec(z),
                params=ModelParams(),
                cfg=IntegratorConfig(),
                seed=None,
            )
        else:
            spec = build_scenario(cfg.scenario, **cfg.scenario_args)
        if cfg.model_overrides:
            spec.params = dataclasses.replace(spec.params, **cfg.model_overrides)
        if cfg.integrator_overrides:
            spec.cfg = dataclasses.replace(spec.cfg, **cfg.integrator_overrides)
        spec.formation.check_against(spec.initial, spec.params)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return spec


# ---------------------------------------------------------------------------
# serialization


def _vector_block(rows) -> str:
    return " ".join("(" + ", ".join(fmt(c) for c in row) + ")" for row in rows)


def resolved_config_text(spec: ScenarioSpec, traj: Trajectory, cfg: RunConfig) -> str:
    """A complete, self-contained config reproducing this run bit for bit.

    The scenario is written in inline form (explicit state and offsets), so
    reproduction does not depend on builder defaults, and the event
    thresholds are written at their resolved values.
    """
    p, ic = spec.params, spec.cfg
    lines = [
        "scenario = inline",
        f"d = {spec.initial.d}",
        "x = " + _vector_block(spec.initial.x),
        "v = " + _vector_block(spec.initial.v),
        "z = " + _vector_block(spec.formation.z),
        f"K = {fmt(p.K)}",
        f"M = {fmt(p.M)}",
        f"alpha = {fmt(p.alpha)}",
        f"beta = {fmt(p.beta)}",
        f"kernel = {p.kernel}",
    ]
    if p.kernel == "shifted":
        lines.append(f"delta = {fmt(p.delta)}")
    lines += [
        f"method = {ic.method}",
        f"dt_init = {fmt(ic.dt_init)}",
        f"rel_tol = {fmt(ic.rel_tol)}",
        f"abs_tol = {fmt(ic.abs_tol)}",
        f"dt_min = {fmt(ic.dt_min)}",
        f"collision_eps = {fmt(traj.collision_eps)}",
        f"near_eps = {fmt(traj.near_eps)}",
        f"t_end = {fmt(ic.t_end)}",
        f"max_steps = {ic.max_steps}",
        f"cadence = {cfg.cadence}",
        "formats = " + ",".join(cfg.formats),
    ]
    return "\n".join(lines) + "\n"


def _flag(value) -> str:
    if value is None:
        return "none"
    return "true" if value else "false"


def certificate_kv(report: CertificateReport) -> str:
    """Machine-readable key = value form of a certificate."""
    lines = [
        f"n = {report.n}",
        f"E0 = {fmt(report.E0)}",
        f"v_diameter_bound = {fmt(report.v_diameter_bound)}",
        "C0_star = " + ("none" if report.C0_star is None else fmt(report.C0_star)),
        "d_M = " + ("none" if report.d_M is None else fmt(report.d_M)),
    ]
    if report.bracket is not None:
        lines += [f"C0 = {fmt(report.bracket.C0)}", f"psi_m = {fmt(report.bracket.psi_m)}"]
        for i, (lo, hi) in enumerate(zip(report.bracket.link_lower, report.bracket.link_upper)):
            lines.append(f"link_{i}_bracket = {fmt(lo)}, {fmt(hi)}")
    else:
        lines += ["C0 = none", "psi_m = none"]
    if report.hypothesis is not None:
        lines += [
            f"hypothesis_i = {_flag(report.hypothesis.holds_i)}",
            f"hypothesis_ii = {_flag(report.hypothesis.holds_ii)}",
            f"hypothesis_satisfied = {_flag(report.hypothesis.satisfied)}",
        ]
    else:
        lines += ["hypothesis_i = none", "hypothesis_ii = none",
                  "hypothesis_satisfied = none"]
    if report.corollary is not None:
        failing = sorted(p for p, ok in report.corollary.pair_holds.items() if not ok)
        lines += [
            f"corollary_overall = {_flag(report.corollary.holds)}",
            f"corollary_pairs = {len(report.corollary.pair_holds)}",
            f"corollary_pairs_failing = {len(failing)}",
        ]
        if failing:
            lines.append("corollary_failing = " + " ".join(f"({i},{j})" for i, j in failing))
    else:
        lines.append("corollary_overall = none")
    return "\n".join(lines) + "\n"


def certificate_text(report: CertificateReport) -> str:
    """Human-readable certificate."""
    p = report.params
    head = (f"certificate for n = {report.n} agents "
            f"(K = {p.K:g}, M = {p.M:g}, alpha = {p.alpha:g}, beta = {p.beta:g}, "
            f"kernel = {p.kernel})")
    rows = [
        ("initial energy E0", f"{report.E0:.6g}"),
        ("velocity-diameter ceiling 2 sqrt(n E0)", f"{report.v_diameter_bound:.6g}"),
    ]
    if report.C0_star is None:
        rows.append(("velocity budget C0*", "undefined (M = 0)"))
    else:
        rows.append(("velocity budget C0*", f"{report.C0_star:.6g}"))
        if report.d_M is None:
            rows.append(("residual bound d_M", "does not exist (budget never closes)"))
        else:
            rows.append(("residual bound d_M", f"{report.d_M:.6g}"))
        if report.bracket is not None:
            rows.append(("a-priori diameter C0", f"{report.bracket.C0:.6g}"))
            rows.append(("kernel floor psi_m", f"{report.bracket.psi_m:.6g}"))
        if report.hypothesis is not None:
            rows.append(("hypothesis (i): beta <= 1",
                         "holds" if report.hypothesis.holds_i else "fails"))
            if report.hypothesis.holds_ii is None:
                rows.append(("hypothesis (ii): tail budget", "not applicable"))
            else:
                rows.append(("hypothesis (ii): tail budget",
                             "holds" if report.hypothesis.holds_ii else "fails"))
            rows.append(("flocking hypothesis",
                         "SATISFIED" if report.hypothesis.satisfied else "NOT SATISFIED"))
        if report.corollary is not None:
            total = len(report.corollary.pair_holds)
            good = sum(report.corollary.pair_holds.values())
            rows.append(("pattern corollary (beta in (0,1))",
                         f"{'holds' if report.corollary.holds else 'fails'} "
                         f"({good}/{total} pairs)"))
    width = max(len(label) for label, _ in rows)
    body = "\n".join(f"  {label:<{width}} : {val}" for label, val in rows)
    out = head + "\n" + body
    if report.bracket is not None:
        links = "\n".join(
            f"  link {i}: [{lo:.6g}, {hi:.6g}]"
            for i, (lo, hi) in enumerate(zip(report.bracket.link_lower,
                                             report.bracket.link_upper))
        )
        out += "\nlink distance brackets:\n" + links
    return out + "\n"


def suspected_asymptotic_collision(traj: Trajectory) -> bool:
    """Heuristic flag: the minimum distance is still decaying at the horizon.

    True when a completed run's minimum pairwise distance decreases
    monotonically over the final quarter of the samples, loses at least ten
    percent there, and sits below a tenth of its initial value.  Finite-time
    claims are out of reach; this only marks runs whose tail behaviour looks
    like an asymptotic collision.
    """
    if traj.status != STATUS_COMPLETED or len(traj.samples) < 8:
        return False
    md = np.array([r.min_dist for r in traj.records])
    tail = md[3 * md.size // 4:]
    monotone = bool(np.all(np.diff(tail) <= 1e-3 * tail[:-1]))
    return monotone and tail[-1] <= 0.9 * tail[0] and tail[-1] < 0.1 * md[0]


# ---------------------------------------------------------------------------
# run directories


def default_output_dir(scenario_name: str) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    return root / scenario_name


def _sampled(traj: Trajectory, cadence: int):
    idx = list(range(0, len(traj.samples), cadence))
    if idx[-1] != len(traj.samples) - 1:
        idx.append(len(traj.samples) - 1)  # terminal row always present
    return idx


def write_trajectory(traj: Trajectory, spec: ScenarioSpec, cfg: RunConfig) -> dict:
    """Persist a run directory; returns {kind: path}.

    states.csv    t, x_0_0 .. x_{n-1}_{d-1}, v_0_0 .. v_{n-1}_{d-1}
    diagnostics.csv  t, E1, E2, D, v_diameter, x_diameter, min_dist, pattern_error
    events.csv    kind, t, i, j, min_distance
    formation.csv i, z_i_0 .. z_i_{d-1}
    summary.txt   terminal metrics, certificate, event counts, resolved config
    """
    out = Path(cfg.output_dir) if cfg.output_dir else default_output_dir(spec.name)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {}
        n, d = spec.initial.n, spec.initial.d
        idx = _sampled(traj, cfg.cadence)
        if "csv" in cfg.formats:
            xcols = [f"x_{i}_{k}" for i in range(n) for k in range(d)]
            vcols = [f"v_{i}_{k}" for i in range(n) for k in range(d)]
            lines = [",".join(["t"] + xcols + vcols)]
            for j in idx:
                st = traj.samples[j][0]
                vals = [st.t, *st.x.ravel(), *st.v.ravel()]
                lines.append(",".join(fmt(v) for v in vals))
            paths["states"] = out / "states.csv"
            paths["states"].write_text("\n".join(lines) + "\n")

            lines = ["t,E1,E2,D,v_diameter,x_diameter,min_dist,pattern_error"]
            for j in idx:
                r = traj.samples[j][1]
                vals = [r.t, r.E1, r.E2, r.D, r.v_diameter, r.x_diameter,
                        r.min_dist, r.pattern_error]
                lines.append(",".join(fmt(v) for v in vals))
            paths["diagnostics"] = out / "diagnostics.csv"
            paths["diagnostics"].write_text("\n".join(lines) + "\n")

            lines = ["kind,t,i,j,min_distance"]
            for e in traj.events:
                lines.append(",".join(
                    [e.kind, fmt(e.t), str(e.agents[0]), str(e.agents[1]),
                     fmt(e.min_distance)]))
            paths["events"] = out / "events.csv"
            paths["events"].write_text("\n".join(lines) + "\n")

            zcols = [f"z_{k}" for k in range(d)]
            lines = [",".join(["i"] + zcols)]
            for i, row in enumerate(spec.formation.z):
                lines.append(",".join([str(i)] + [fmt(c) for c in row]))
            paths["formation"] = out / "formation.csv"
            paths["formation"].write_text("\n".join(lines) + "\n")

        if "summary" in cfg.formats:
            paths["summary"] = out / "summary.txt"
            paths["summary"].write_text(summary_text(traj, spec, cfg))
        return paths
    except OSError as exc:
        raise OSError(f"cannot write run directory {out}: {exc}") from exc


def summary_text(traj: Trajectory, spec: ScenarioSpec, cfg: RunConfig) -> str:
    """Terminal metrics, event counts, certificate, and the resolved config."""
    rec = traj.final_record
    parts = ["# flockform run summary", "[run]"]
    parts += [
        f"scenario = {spec.name}",
        f"seed = {'none' if spec.seed is None else spec.seed}",
        f"status = {traj.status}",
        f"n = {spec.initial.n}",
        f"d = {spec.initial.d}",
        f"t_final = {fmt(traj.final_state.t)}",
        f"steps_accepted = {traj.n_accepted}",
        f"steps_rejected = {traj.n_rejected}",
        f"collision_eps = {fmt(traj.collision_eps)}",
        f"near_eps = {fmt(traj.near_eps)}",
        f"suspected_asymptotic_collision = {_flag(suspected_asymptotic_collision(traj))}",
    ]
    parts.append("[terminal]")
    parts += [
        f"E1 = {fmt(rec.E1)}",
        f"E2 = {fmt(rec.E2)}",
        f"D = {fmt(rec.D)}",
        f"v_diameter = {fmt(rec.v_diameter)}",
        f"x_diameter = {fmt(rec.x_diameter)}",
        f"min_dist = {fmt(rec.min_dist)}",
        f"pattern_error = {fmt(rec.pattern_error)}",
        f"min_dist_overall = {fmt(min(r.min_dist for r in traj.records))}",
    ]
    parts.append("[events]")
    for kind in (EVENT_NEAR_COLLISION, EVENT_NUMERICAL_COLLISION, EVENT_STEP_FLOOR):
        parts.append(f"{kind} = {traj.event_count(kind)}")
    parts.append("[certificate]")
    report = certify(spec.initial, spec.formation, spec.params)
    parts.append(certificate_kv(report).rstrip("\n"))
    parts.append("[resolved-config]")
    parts.append(resolved_config_text(spec, traj, cfg).rstrip("\n"))
    return "\n".join(parts) + "\n"


def extract_resolved_config(summary: str) -> str:
    """The resolved-config section of a summary, ready for parse_config."""
    lines = summary.splitlines()
    try:
        start = lines.index("[resolved-config]") + 1
    except ValueError:
        raise ValueError("summary has no [resolved-config] section") from None
    body = []
    for line in lines[start:]:
        if line.startswith("["):
            break
        body.append(line)
    return "\n".join(body) + "\n"


def parse_summary(summary: str) -> dict:
    """Sections of a summary as {section: {key: raw value string}}."""
    sections = {}
    current = None
    for line in summary.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = {}
        elif "=" in line and current is not None:
            key, _, val = line.partition("=")
            sections[current][key.strip()] = val.strip()
    return sections
