"""Command-line surface: subcommands, exit codes, reproducible files."""

import json

import numpy as np
import pytest

from degreeflow.cli import main
from degreeflow.config import parse_config
from degreeflow.errors import ValidationError

BASE = """\
[rates]
omega_r = 1
omega_p = 1
l_d = 1
l_r = 1
l_p = 0
n_d = 1
n_r = 1
n_p = 1
m = 3

[initial]
kind = polynomial
coeffs = 0, 0, 1

[grid]
x_min = -1
x_max = 1
x_points = 21
t_max = 0.5
t_points = 6

[mc]
nodes = 200
replicas = 2
seed = 7
sample_times = 0.05
k_max = 30

[output]
dir = {out}
"""


def _ini(tmp_path, body=BASE, name="exp.ini", outname="out"):
    out = tmp_path / outname
    path = tmp_path / name
    path.write_text(body.format(out=out))
    return str(path), out


def _load_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    data = np.genfromtxt(lines[2:], delimiter=",")
    return lines[0].split("=", 1)[1], lines[1].split(","), np.atleast_2d(data)


def test_solve_writes_field_and_moment(tmp_path, capsys):
    ini, out = _ini(tmp_path)
    assert main(["solve", "--config", ini]) == 0
    _, header, rows = _load_csv(out / "field.csv")
    assert header == ["t", "x", "G", "Gx"]
    assert rows.shape == (6 * 21, 4)
    # the x = 1 column stays normalized
    ones = rows[rows[:, 1] == 1.0]
    np.testing.assert_allclose(ones[:, 2], 1.0, atol=1e-9)
    _, mheader, mrows = _load_csv(out / "gmoment.csv")
    assert mheader == ["t", "g", "dg_dt"]
    assert mrows.shape == (6, 3)
    assert mrows[0, 1] == pytest.approx(2.0)


def test_solve_respects_out_flag(tmp_path):
    ini, _ = _ini(tmp_path)
    target = tmp_path / "elsewhere"
    assert main(["solve", "--config", ini, "--out", str(target)]) == 0
    assert (target / "field.csv").exists()


def test_config_hash_ignores_output_location(tmp_path):
    ini, out = _ini(tmp_path)
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["solve", "--config", ini, "--out", str(a)]) == 0
    assert main(["solve", "--config", ini, "--out", str(b)]) == 0
    assert (a / "field.csv").read_bytes() == (b / "field.csv").read_bytes()


def test_steady_with_explicit_constants(tmp_path, capsys):
    body = BASE.replace("x_points = 21", "x_points = 41")
    ini, out = _ini(tmp_path, body)
    code = main(["steady", "--config", ini, "--constants", "2,1,1,2,3"])
    assert code == 0
    _, header, rows = _load_csv(out / "steady.csv")
    assert header == ["x", "g_star", "residual"]
    at_half = rows[rows[:, 0] == 0.5][0]
    assert at_half[1] == pytest.approx(0.1, abs=1e-6)
    assert np.isnan(at_half[2])  # singular point: residual suppressed
    interior = rows[np.isfinite(rows[:, 2])]
    assert np.max(np.abs(interior[:, 2])) < 1e-6
    assert "two_singularity" in capsys.readouterr().out


def test_steady_from_rates_exit_codes(tmp_path):
    ini, out = _ini(tmp_path)
    assert main(["steady", "--config", ini]) == 0
    assert (out / "steady.csv").exists()


def test_divergent_rates_exit_code(tmp_path):
    body = BASE.replace("omega_r = 1", "omega_r = 0")
    body = body.replace("omega_p = 1", "omega_p = 0")
    body = body.replace("l_d = 1", "l_d = 0")
    body = body.replace("n_d = 1", "n_d = 0")
    body = body.replace("n_r = 1", "n_r = 0")
    body = body.replace("n_p = 1", "n_p = 0")
    body = body.replace("m = 3", "m = 0")
    body = body.replace("coeffs = 0, 0, 1", "coeffs = 0, 1")
    ini, _ = _ini(tmp_path, body)
    assert main(["steady", "--config", ini]) == 3


def test_invalid_config_exit_code(tmp_path, capsys):
    body = BASE.replace("omega_r = 1", "omega_r = -1")
    ini, _ = _ini(tmp_path, body)
    assert main(["steady", "--config", ini]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["solve", "--config", str(tmp_path / "nope.ini")]) == 1
    assert "error:" in capsys.readouterr().err


def test_ode_moment_columns(tmp_path):
    ini, out = _ini(tmp_path)
    assert main(["ode", "--config", ini]) == 0
    _, header, rows = _load_csv(out / "ode_moments.csv")
    assert header == ["t", "mass", "first_moment", "g_closed", "gap"]
    np.testing.assert_allclose(rows[:, 1], 1.0, atol=1e-8)
    assert np.max(rows[:, 4]) < 1e-6
    _, _, dist_rows = _load_csv(out / "ode.csv")
    assert dist_rows.shape[1] == 3


def test_mc_is_byte_reproducible(tmp_path):
    ini, _ = _ini(tmp_path)
    a = tmp_path / "ra"
    b = tmp_path / "rb"
    assert main(["mc", "--config", ini, "--out", str(a)]) == 0
    assert main(["mc", "--config", ini, "--out", str(b)]) == 0
    assert (a / "mc.csv").read_bytes() == (b / "mc.csv").read_bytes()


def test_mc_seed_changes_output(tmp_path):
    ini, _ = _ini(tmp_path)
    a = tmp_path / "sa"
    b = tmp_path / "sb"
    assert main(["mc", "--config", ini, "--out", str(a)]) == 0
    assert main(["mc", "--config", ini, "--out", str(b), "--seed", "8"]) == 0
    assert (a / "mc.csv").read_bytes() != (b / "mc.csv").read_bytes()


def test_compare_report(tmp_path):
    ini, out = _ini(tmp_path)
    assert main(["compare", "--config", ini]) == 0
    report = json.loads((out / "fit.json").read_text())
    assert report["steady_case"] == "series_seeded"
    assert report["certified"] is True
    # the configured horizon ends before the default fit window opens
    assert "error" in report["fit"]
    assert report["oracle_max_abs_dev"] < 1e-6
    hash_line, _, _ = _load_csv(out / "norms.csv")
    assert report["config_hash"] == hash_line


def test_compare_fit_window(tmp_path):
    body = BASE.replace("t_max = 0.5", "t_max = 2.0")
    body = body.replace("t_points = 6", "t_points = 21")
    body += "\n[analysis]\nfit_t_min = 0.2\n"
    ini, out = _ini(tmp_path, body)
    assert main(["compare", "--config", ini]) == 0
    report = json.loads((out / "fit.json").read_text())
    assert report["fit"]["model"] in ("exponential", "algebraic")
    assert report["fit"]["n_points"] >= 5


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "degreeflow" in capsys.readouterr().out


def test_constants_flag_validation(tmp_path, capsys):
    ini, _ = _ini(tmp_path)
    assert main(["steady", "--config", ini, "--constants", "1,2,3"]) == 1


def test_parse_config_round_trip(tmp_path):
    ini, _ = _ini(tmp_path)
    cfg = parse_config(ini)
    assert cfg.rates.m == 3
    assert cfg.initial_kind == "polynomial"
    assert cfg.x_points == 21
    assert cfg.mc_seed == 7
    # hash is stable under relocation but sensitive to physics
    assert cfg.hash == cfg.override(out_dir="/somewhere").hash
    assert cfg.hash != cfg.override(solver_tol=1e-9).hash


def test_parse_config_requires_rates(tmp_path):
    p = tmp_path / "norates.ini"
    p.write_text("[grid]\nx_points = 5\n")
    with pytest.raises(ValidationError):
        parse_config(str(p))
