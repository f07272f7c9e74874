"""Command-line interface.

Subcommands: run (simulate a scenario and write a run directory), certify
(evaluate the analytical conditions without integrating), list-scenarios,
and convergence (fixed-step RK4 halving study).

Exit codes: 0 success, 1 configuration error, 2 numerical failure (blow-up
or step floor), 3 I/O error.  A numerical collision is a finding, not a
failure: the run directory records the event and the exit code is 0.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .diagnostics import certify
from .integrate import (
    IntegratorConfig,
    NumericalBlowUpError,
    STATUS_STEP_FLOOR,
    simulate,
)
from .model import FormationSpec, ModelParams, SwarmState
from .runio import (
    ConfigError,
    RunConfig,
    certificate_kv,
    certificate_text,
    default_output_dir,
    parse_config,
    resolve_scenario,
    write_trajectory,
)
from .scenarios import scenario_names

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

_USAGE = """usage: flockform <command> [options]

commands:
  run <scenario>|--config FILE   simulate and write a run directory
  certify <scenario>|--config FILE   evaluate analytical conditions only
  list-scenarios                 print the available scenario names
  convergence                    fixed-step RK4 halving study

common options (run, certify):
  --config FILE         read a key = value configuration document
  --out DIR             output directory (default $FLOCKFORM_RUNS/<scenario>)
  --seed N --n N --radius R --swapped      scenario arguments
  --kernel K --alpha A --beta B --K v --M v --delta v     model overrides
  --method m --dt-init v --rel-tol v --abs-tol v --dt-min v
  --collision-eps v --near-eps v --t-end v --max-steps N  stepper overrides
  --cadence k           write every k-th accepted step
  --formats LIST        any of csv,summary (default both)
"""

_SCENARIO_OPTS = {"seed": int, "n": int, "radius": float}
_MODEL_OPTS = {"kernel": str, "alpha": float, "beta": float,
               "K": float, "M": float, "delta": float}
_INTEGRATOR_OPTS = {"method": str, "dt-init": float, "rel-tol": float,
                    "abs-tol": float, "dt-min": float, "collision-eps": float,
                    "near-eps": float, "t-end": float, "max-steps": int}
_OUTPUT_OPTS = {"out": str, "cadence": int, "formats": str}


def _parse_options(argv):
    """Hand-rolled option scan so bad flags map to exit code 1, not 2."""
    opts = {}
    positional = []
    known = {**_SCENARIO_OPTS, **_MODEL_OPTS, **_INTEGRATOR_OPTS, **_OUTPUT_OPTS,
             "config": str}
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg == "--swapped":
            opts["swapped"] = True
            i += 1
            continue
        if arg.startswith("--"):
            name = arg[2:]
            if name not in known:
                raise ConfigError(f"unknown option --{name}")
            if i + 1 >= len(argv):
                raise ConfigError(f"option --{name} needs a value")
            raw = argv[i + 1]
            kind = known[name]
            try:
                opts[name] = kind(raw)
            except ValueError:
                raise ConfigError(
                    f"option --{name} expects a {kind.__name__}, got {raw!r}"
                ) from None
            i += 2
        else:
            positional.append(arg)
            i += 1
    return positional, opts


def _run_config(positional, opts) -> RunConfig:
    if "config" in opts:
        path = Path(opts.pop("config"))
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        cfg = parse_config(text)
        if positional:
            raise ConfigError("give either a scenario name or --config, not both")
    else:
        if len(positional) != 1:
            raise ConfigError("expected exactly one scenario name (or --config FILE)")
        cfg = RunConfig(scenario=positional[0])
        if cfg.scenario not in scenario_names():
            raise ConfigError(
                f"unknown scenario {cfg.scenario!r}; choose from {scenario_names()}"
            )
    for key, val in opts.items():
        if key in ("seed", "n", "radius", "swapped"):
            cfg.scenario_args[key] = val
        elif key in _MODEL_OPTS:
            cfg.model_overrides[key] = val
        elif key in ("out",):
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
        else:
            cfg.integrator_overrides[key.replace("-", "_")] = val
    return cfg


def _cmd_run(argv) -> int:
    cfg = _run_config(*_parse_options(argv))
    spec = resolve_scenario(cfg)
    try:
        traj = simulate(spec.initial, spec.params, spec.formation, spec.cfg)
    except NumericalBlowUpError as exc:
        print(f"error: numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    paths = write_trajectory(traj, spec, cfg)
    out = paths.get("summary") or next(iter(paths.values()))
    rec = traj.final_record
    print(f"{spec.name}: {traj.status} at t = {traj.final_state.t:g} "
          f"({traj.n_accepted} steps, {len(traj.events)} events); "
          f"pattern_error = {rec.pattern_error:.3e}, min_dist = {rec.min_dist:.3e}")
    print(f"wrote {out.parent}")
    if traj.status == STATUS_STEP_FLOOR:
        print("error: step size hit the floor; see events.csv", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_certify(argv) -> int:
    cfg = _run_config(*_parse_options(argv))
    spec = resolve_scenario(cfg)
    report = certify(spec.initial, spec.formation, spec.params)
    text = certificate_text(report)
    print(text, end="")
    out = Path(cfg.output_dir) if cfg.output_dir else default_output_dir(spec.name)
    out.mkdir(parents=True, exist_ok=True)
    (out / "certificate.txt").write_text(text)
    (out / "certificate.kv").write_text(certificate_kv(report))
    print(f"wrote {out / 'certificate.kv'}")
    return EXIT_OK


def convergence_table(dts=(1 / 16, 1 / 32, 1 / 64), ref_dt=1 / 512, t_end=2.0, seed=11):
    """Terminal-state RK4 errors against a fine reference on a smooth run.

    The test problem is pure velocity alignment (M = 0) under the regular
    kernel, so the right-hand side is globally smooth and the expected
    error ratio under dt halving is 2**4 = 16.
    """
    rng = np.random.default_rng(seed)
    x0 = rng.normal(scale=1.5, size=(4, 2))
    v0 = rng.normal(size=(4, 2))
    z = rng.normal(size=(3, 2))
    params = ModelParams(K=10.0, M=0.0, alpha=0.5, kernel="regular")
    spec = FormationSpec(z)

    def terminal(dt):
        cfg = IntegratorConfig(method="rk4", dt_init=dt, t_end=t_end)
        st = simulate(SwarmState(0.0, x0, v0), params, spec, cfg).final_state
        return np.concatenate([st.x.ravel(), st.v.ravel()])

    ref = terminal(ref_dt)
    rows = []
    for dt in dts:
        err = float(np.linalg.norm(terminal(dt) - ref))
        ratio = rows[-1][1] / err if rows else float("nan")
        rows.append((dt, err, ratio))
    return rows


def _cmd_convergence(argv) -> int:
    if argv:
        raise ConfigError("convergence takes no arguments")
    rows = convergence_table()
    print(f"{'dt':>12} {'terminal error':>16} {'ratio':>8}")
    for dt, err, ratio in rows:
        tail = f"{ratio:8.2f}" if np.isfinite(ratio) else "       -"
        print(f"{dt:12.6f} {err:16.6e} {tail}")
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help", "help"):
        print(_USAGE)
        return EXIT_OK
    command, rest = argv[0], argv[1:]
    try:
        if command == "run":
            return _cmd_run(rest)
        if command == "certify":
            return _cmd_certify(rest)
        if command == "list-scenarios":
            if rest:
                raise ConfigError("list-scenarios takes no arguments")
            for name in scenario_names():
                print(name)
            return EXIT_OK
        if command == "convergence":
            return _cmd_convergence(rest)
        raise ConfigError(f"unknown command {command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
