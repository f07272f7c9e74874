"""Tests for configuration parsing, run persistence, and the CLI surface."""

import numpy as np
import pytest

from flockform.cli import convergence_table, main
from flockform.integrate import simulate
from flockform.runio import (
    ConfigError,
    RunConfig,
    extract_resolved_config,
    parse_config,
    parse_summary,
    resolve_scenario,
    write_trajectory,
)


def run_small(cfg):
    spec = resolve_scenario(cfg)
    traj = simulate(spec.initial, spec.params, spec.formation, spec.cfg)
    return spec, traj


# ---------------------------------------------------------------------------
# parsing


def test_minimal_bird_document_gets_stock_gains():
    cfg = parse_config("scenario = bird\n")
    spec = resolve_scenario(cfg)
    p = spec.params
    assert (p.K, p.M, p.alpha, p.beta) == (10.0, 50.0, 1.1, 0.5)
    assert p.kernel == "singular"


def test_override_alpha_on_crossover():
    cfg = parse_config("scenario = line-crossover\nalpha = 1.5\nkernel = singular\n")
    spec = resolve_scenario(cfg)
    assert spec.params.alpha == 1.5 and spec.params.kernel == "singular"


def test_unknown_key_rejected_by_name():
    with pytest.raises(ConfigError) as exc:
        parse_config("scenario = bird\ngamma = 3\n")
    assert "gamma" in str(exc.value) and "line 2" in str(exc.value)


def test_type_mismatch_names_key():
    with pytest.raises(ConfigError) as exc:
        parse_config("scenario = bird\nn = ten\n")
    assert "'n'" in str(exc.value)


def test_malformed_line_reports_position():
    with pytest.raises(ConfigError) as exc:
        parse_config("scenario = bird\njust words\n")
    assert "line 2" in str(exc.value)


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("scenario = bird\nseed = 1\nseed = 2\n")


def test_missing_scenario_rejected():
    with pytest.raises(ConfigError):
        parse_config("alpha = 1.0\n")


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError):
        parse_config("scenario = thursday\n")


def test_inapplicable_scenario_argument_rejected():
    cfg = parse_config("scenario = bird\nradius = 4.0\n")
    with pytest.raises(ConfigError):
        resolve_scenario(cfg)


def test_bool_and_formats_parsing():
    cfg = parse_config("scenario = degenerate-square\nswapped = true\nformats = summary\n")
    assert cfg.scenario_args["swapped"] is True
    assert cfg.formats == ("summary",)
    with pytest.raises(ConfigError):
        parse_config("scenario = bird\nformats = csv,xml\n")


def test_inline_scenario_document():
    text = """
scenario = inline
d = 1
x = 0.5 1.0 1.5 -1.0
v = -0.25 0.5 -0.75 1.0
z = -2 -2 -2
beta = 0.5
t_end = 0.25
"""
    spec = resolve_scenario(parse_config(text))
    assert spec.initial.n == 4 and spec.initial.d == 1
    assert np.allclose(spec.formation.z, -2.0)
    assert spec.cfg.t_end == 0.25


def test_inline_vectors_2d():
    text = "scenario = inline\nx = (0, 0) (1, 0)\nv = (0, 0) (0, 0)\nz = (2, 1)\n"
    spec = resolve_scenario(parse_config(text))
    assert spec.initial.x.shape == (2, 2)
    assert np.allclose(spec.formation.z, [[2.0, 1.0]])


def test_inline_requires_state_keys():
    with pytest.raises(ConfigError):
        parse_config("scenario = inline\nx = 0 1\nv = 0 0\n")
    with pytest.raises(ConfigError):
        parse_config("scenario = bird\nx = 0 1\n")


# ---------------------------------------------------------------------------
# run directories


@pytest.fixture()
def tiny_run(tmp_path):
    cfg = parse_config(
        "scenario = line-crossover\nkernel = regular\nalpha = 0.5\nt_end = 0.5\n"
        f"output_dir = {tmp_path / 'out'}\n"
    )
    spec, traj = run_small(cfg)
    paths = write_trajectory(traj, spec, cfg)
    return cfg, spec, traj, paths


def test_states_csv_column_count(tiny_run):
    _, spec, traj, paths = tiny_run
    lines = paths["states"].read_text().splitlines()
    header = lines[0].split(",")
    assert len(header) == 1 + 2 * spec.initial.n * spec.initial.d  # 9 for n=4, d=1
    assert header[0] == "t" and header[1] == "x_0_0" and header[-1] == "v_3_0"
    assert len(lines) == 1 + len(traj.samples)


def test_states_csv_round_trips_doubles(tiny_run):
    _, _, traj, paths = tiny_run
    last = paths["states"].read_text().splitlines()[-1].split(",")
    st = traj.final_state
    assert float(last[0]) == st.t
    assert [float(c) for c in last[1:5]] == list(st.x.ravel())


def test_diagnostics_csv_schema(tiny_run):
    _, _, traj, paths = tiny_run
    lines = paths["diagnostics"].read_text().splitlines()
    assert lines[0] == "t,E1,E2,D,v_diameter,x_diameter,min_dist,pattern_error"
    row = [float(v) for v in lines[1].split(",")]
    rec = traj.records[0]
    assert row[1] == rec.E1 and row[6] == rec.min_dist


def test_events_csv_header_only_without_events(tiny_run):
    _, _, traj, paths = tiny_run
    lines = paths["events"].read_text().splitlines()
    assert lines[0] == "kind,t,i,j,min_distance"
    assert len(lines) == 1 + len(traj.events)


def test_formation_csv(tiny_run):
    _, spec, _, paths = tiny_run
    lines = paths["formation"].read_text().splitlines()
    assert lines[0] == "i,z_0"
    assert len(lines) == 1 + spec.formation.z.shape[0]
    assert float(lines[1].split(",")[1]) == -2.0


def test_states_csv_five_columns_for_pair_in_1d(tmp_path):
    cfg = parse_config(
        "scenario = inline\nx = 0.0 1.0\nv = 0.1 -0.1\nz = -1.0\nt_end = 0.05\n"
        f"output_dir = {tmp_path}\n"
    )
    spec, traj = run_small(cfg)
    paths = write_trajectory(traj, spec, cfg)
    header = paths["states"].read_text().splitlines()[0]
    assert header == "t,x_0_0,x_1_0,v_0_0,v_1_0"


def test_cadence_subsamples_and_keeps_last(tmp_path):
    cfg = parse_config(
        "scenario = line-crossover\nkernel = regular\nalpha = 0.5\nt_end = 0.5\n"
        f"cadence = 7\noutput_dir = {tmp_path}\n"
    )
    spec, traj = run_small(cfg)
    paths = write_trajectory(traj, spec, cfg)
    lines = paths["states"].read_text().splitlines()
    expected = len(range(0, len(traj.samples), 7))
    if (len(traj.samples) - 1) % 7 != 0:
        expected += 1
    assert len(lines) == 1 + expected
    assert float(lines[-1].split(",")[0]) == traj.final_state.t


def test_summary_sections(tiny_run):
    _, _, traj, paths = tiny_run
    sections = parse_summary(paths["summary"].read_text())
    assert sections["run"]["status"] == "completed"
    assert sections["run"]["scenario"] == "line-crossover"
    assert int(sections["run"]["steps_accepted"]) == traj.n_accepted
    assert float(sections["terminal"]["min_dist"]) == traj.final_record.min_dist
    assert "numerical-collision" in sections["events"]
    assert "d_M" in sections["certificate"]


def test_summary_config_round_trip_is_bitwise(tiny_run, tmp_path):
    cfg, spec, traj, paths = tiny_run
    resolved = extract_resolved_config(paths["summary"].read_text())
    cfg2 = parse_config(resolved)
    cfg2.output_dir = str(tmp_path / "replay")
    spec2, traj2 = run_small(cfg2)
    assert np.array_equal(spec2.initial.x, spec.initial.x)
    assert traj2.final_state.t == traj.final_state.t
    assert np.array_equal(traj2.final_state.x, traj.final_state.x)
    assert np.array_equal(traj2.final_state.v, traj.final_state.v)
    assert traj2.n_accepted == traj.n_accepted
    # the round trip is idempotent: the replay's resolved config is identical
    paths2 = write_trajectory(traj2, spec2, cfg2)
    assert extract_resolved_config(paths2["summary"].read_text()) == resolved


# ---------------------------------------------------------------------------
# CLI


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out.split()
    assert out == ["bird", "circle", "degenerate-square", "line-crossover", "rings"]


def test_cli_run_crossover_no_collision(tmp_path, capsys):
    code = main(["run", "line-crossover", "--kernel", "singular", "--alpha", "1.5",
                 "--t-end", "0.5", "--out", str(tmp_path / "r")])
    assert code == 0
    events = (tmp_path / "r" / "events.csv").read_text().splitlines()
    assert not any("numerical-collision" in line for line in events[1:])
    assert (tmp_path / "r" / "summary.txt").exists()


def test_cli_run_collision_is_a_finding_not_a_failure(tmp_path):
    code = main(["run", "line-crossover", "--kernel", "singular", "--alpha", "0.5",
                 "--out", str(tmp_path / "r")])
    assert code == 0
    events = (tmp_path / "r" / "events.csv").read_text()
    assert "numerical-collision" in events


def test_cli_run_step_floor_exit_code(tmp_path):
    code = main(["run", "line-crossover", "--kernel", "singular", "--alpha", "1.5",
                 "--dt-min", "0.5", "--out", str(tmp_path / "r")])
    assert code == 2


def test_cli_certify_reports_failed_tail_budget(tmp_path, capsys):
    doc = tmp_path / "c.cfg"
    doc.write_text(
        "scenario = inline\n"
        "x = 0.0 1.0\n"
        "v = 2.0 -2.0\n"
        "z = -1.0\n"
        "M = 1.0\nbeta = 2.0\n"
        f"output_dir = {tmp_path / 'cert'}\n"
    )
    code = main(["certify", "--config", str(doc)])
    assert code == 0  # certification completed; failure is a finding
    out = capsys.readouterr().out
    assert "NOT SATISFIED" in out
    kv = (tmp_path / "cert" / "certificate.kv").read_text()
    assert "hypothesis_ii = false" in kv
    assert "d_M = none" in kv


def test_cli_config_errors_exit_one(tmp_path, capsys):
    assert main(["run", "no-such-scenario"]) == 1
    assert main(["run", "bird", "--gamma", "2"]) == 1
    assert main(["frobnicate"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario = bird\ngamma = 1\n")
    assert main(["run", "--config", str(bad)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    capsys.readouterr()


def test_cli_io_error_exit_three(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    code = main(["run", "line-crossover", "--kernel", "regular", "--alpha", "0.5",
                 "--t-end", "0.1", "--out", str(blocker / "sub")])
    assert code == 3


def test_cli_output_root_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("FLOCKFORM_RUNS", str(tmp_path / "root"))
    code = main(["run", "line-crossover", "--kernel", "regular", "--alpha", "0.5",
                 "--t-end", "0.1"])
    assert code == 0
    assert (tmp_path / "root" / "line-crossover" / "states.csv").exists()
    capsys.readouterr()


def test_cli_convergence(capsys):
    assert main(["convergence"]) == 0
    out = capsys.readouterr().out
    assert "ratio" in out


def test_convergence_table_fourth_order():
    rows = convergence_table(dts=(1 / 16, 1 / 32), ref_dt=1 / 512)
    assert 12.0 <= rows[1][2] <= 20.0
