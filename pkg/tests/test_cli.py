import csv
import json
import math

import numpy as np
import pytest

from vdwwaves.cli import DEFAULTS, ConfigError, main, parse_config_text, parse_range, resolve_config
from vdwwaves.gas import GasParameters, coefficients


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_parse_config_text():
    cfg = parse_config_text("# gas\ngas.gamma = 1.3  # comment\n\ngrid.n_theta=32\ngrid.bc=dirichlet-from-exact\n")
    assert cfg == {"gas.gamma": 1.3, "grid.n_theta": 32, "grid.bc": "dirichlet-from-exact"}
    assert isinstance(cfg["grid.n_theta"], int)


@pytest.mark.parametrize("text", ["gas.nope=1", "gas.gamma", "gas.gamma=abc"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_precedence(tmp_path):
    f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
    f1.write_text("gas.gamma=1.3\ngas.a_tilde=0.2\n")
    f2.write_text("gas.gamma=1.2\n")
    cfg = resolve_config([f1, f2], ["gas.a_tilde=0.5"], env={"VDW_OUT": "/tmp/x"})
    assert (cfg["gas.gamma"], cfg["gas.a_tilde"], cfg["output_dir"]) == (1.2, 0.5, "/tmp/x")
    assert cfg["gas.b_tilde"] == DEFAULTS["gas.b_tilde"]


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("VDW_OUT", str(tmp_path / "env"))
    assert main(["coeffs"]) == 0
    assert (tmp_path / "env" / "coeffs.csv").exists()


@pytest.mark.parametrize("text, expected", [("", []), ("0.1,0.2", [0.1, 0.2]), ("0:1:3", [0.0, 0.5, 1.0])])
def test_parse_range(text, expected):
    assert parse_range(text) == expected


def test_coeffs_row(tmp_path):
    code, out = run(tmp_path, "coeffs")
    assert code == 0
    rows = read_csv(out / "coeffs.csv")
    assert rows[0] == ["gamma", "a_tilde", "b_tilde", "c0", "gamma_hat0", "lambda0", "beta_hat", "q"]
    vals = [float(v) for v in rows[1]]
    assert vals[:3] == [1.4, 0.0, 0.0]
    assert vals[3] == pytest.approx(math.sqrt(1.4), rel=1e-15)
    assert vals[5] == pytest.approx(2.4 * 2.6 / (2 * math.sqrt(1.4)), rel=1e-15)
    # full precision in the file
    assert float(rows[1][5]) == coefficients(GasParameters()).lambda0


def test_coeffs_deterministic(tmp_path):
    _, a = run(tmp_path, "coeffs", "--set", "gas.a_tilde=0.4", name="a")
    _, b = run(tmp_path, "coeffs", "--set", "gas.a_tilde=0.4", name="b")
    assert (a / "coeffs.csv").read_bytes() == (b / "coeffs.csv").read_bytes()
    ma, mb = (json.loads((d / "manifest.json").read_text()) for d in (a, b))
    ma["config"].pop("output_dir"), mb["config"].pop("output_dir")
    assert ma == mb


def test_manifest_contents(tmp_path):
    _, out = run(tmp_path, "coeffs")
    m = json.loads((out / "manifest.json").read_text())
    assert m["command"] == "coeffs" and m["files"] == ["coeffs.csv"]
    assert "time" not in json.dumps(m).lower()
    # config.txt round-trips
    assert resolve_config([out / "config.txt"])["gas.gamma"] == 1.4


def test_invalid_covolume_exits_nonzero(tmp_path, capsys):
    code, _ = run(tmp_path, "coeffs", "--set", "gas.b_tilde=0.35")
    assert code == 2
    assert "b_tilde" in capsys.readouterr().err


def test_unknown_key_exits_nonzero(tmp_path, capsys):
    code, _ = run(tmp_path, "coeffs", "--set", "gas.bogus=1")
    assert code == 2 and "bogus" in capsys.readouterr().err


def test_simulate_zero(tmp_path):
    code, out = run(tmp_path, "simulate", "--set", "simulate.ic=zero", "--set", "grid.n_theta=16",
                    "--set", "grid.n_eta=8", "--set", "simulate.snapshot_every=0.01")
    assert code == 0
    rows = read_csv(out / "snapshots.csv")
    assert all(float(r[-1]) == 0.0 for r in rows[1:])
    cons = read_csv(out / "conservation.csv")
    assert cons[0] == ["tau", "mass", "relative_drift"] and len(cons) > 3


def test_simulate_sine_conserves_mass(tmp_path):
    code, out = run(tmp_path, "simulate", "--set", "simulate.ic=sine", "--set", "simulate.tau_end=0.05")
    assert code == 0
    drift = [float(r[2]) for r in read_csv(out / "conservation.csv")[1:]]
    assert max(drift) < 1e-10


def test_simulate_exact_dirichlet(tmp_path):
    code, out = run(tmp_path, "simulate", "--set", "simulate.ic=exact:wavefan_plus",
                    "--set", "grid.bc=dirichlet-from-exact", "--set", "simulate.tau_end=0.05")
    assert code == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["final_max_error"] < 1e-3
    assert m["scheme"]["cfl"] == 0.4 and "lambda0" in m["coefficients"]


def test_simulate_dirichlet_needs_exact(tmp_path):
    assert run(tmp_path, "simulate", "--set", "grid.bc=dirichlet-from-exact")[0] == 2


def test_simulate_unknown_ic(tmp_path):
    assert run(tmp_path, "simulate", "--set", "simulate.ic=square")[0] == 2


def test_exact_output(tmp_path):
    code, out = run(tmp_path, "exact", "--set", "grid.n_theta=8", "--set", "grid.n_eta=8",
                    "--set", "grid.eta_min=0.5", "--set", "exact.tau=0.2")
    assert code == 0
    rows = read_csv(out / "exact.csv")
    assert rows[0] == ["tau", "theta", "eta", "h", "variant"]
    assert len(rows) == 1 + 64 and rows[1][-1] == "wavefan_plus"
    rep = json.loads((out / "exact_report.json").read_text())
    assert rep["admissible"] and rep["max_residual"] < 1e-6


def test_shock_outputs(tmp_path):
    code, out = run(tmp_path, "shock", "--set", "gas.a_tilde=0.4", "--set", "gas.b_tilde=0.1",
                    "--set", "shock.b_values=0.05:0.3:6", "--set", "shock.a_values=0.1,0.5,0.9")
    assert code == 0
    rep = json.loads((out / "shock_report.json").read_text())
    alpha = (math.sqrt(3) - 1) / math.sqrt(3)
    assert rep["decay_slope"] == pytest.approx(-alpha, abs=1e-12)
    assert rep["decay_slope_integrated"] == pytest.approx(-alpha, abs=1e-3)
    assert rep["classification_wavefan_plus"] == "compressive"
    assert rep["speed_at_unit_point"] == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    assert rep["trend_b"] == "increasing"
    assert rep["b_star"] == pytest.approx(0.0852450088, abs=1e-9)
    closed = np.array(read_csv(out / "trajectory_closed.csv")[1:], dtype=float)
    integ = np.array(read_csv(out / "trajectory_integrated.csv")[1:], dtype=float)
    assert np.allclose(closed, integ, rtol=1e-6)
    assert len(read_csv(out / "trend_a.csv")) == 4


def test_shock_ideal_has_no_b_star(tmp_path):
    code, out = run(tmp_path, "shock", "--set", "shock.n=20")
    assert code == 0
    rep = json.loads((out / "shock_report.json").read_text())
    assert rep["b_star"] is None and "b_star_note" in rep


def test_sweep(tmp_path):
    args = ("sweep", "--set", "sweep.a_tilde=0:0.8:3", "--set", "sweep.b_tilde=0.1,0.35")
    code, out = run(tmp_path, *args, "--jobs", "2", name="par")
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 1 + 6
    assert sum(r[-1] == "ok" for r in rows[1:]) == 3
    assert len(list((out / "sweep").glob("*.csv"))) == 6
    _, ser = run(tmp_path, *args, name="ser")
    assert (ser / "sweep.csv").read_bytes() == (out / "sweep.csv").read_bytes()
    assert sorted(p.name for p in (ser / "sweep").iterdir()) == sorted(p.name for p in (out / "sweep").iterdir())


@pytest.mark.slow
def test_verify_passes(tmp_path, capsys):
    code, out = run(tmp_path, "verify")
    assert code == 0
    rep = json.loads((out / "verify_report.json").read_text())
    assert rep["passed"] and len(rep["checks"]) > 8
    assert "all checks passed" in capsys.readouterr().out


@pytest.mark.slow
def test_verify_detects_bad_coefficient(tmp_path):
    code, out = run(tmp_path, "verify", "--set", "verify.perturb_lambda0=1e-3")
    assert code == 1
    rep = json.loads((out / "verify_report.json").read_text())
    assert not rep["passed"]


@pytest.mark.slow
def test_verify_seed_determinism(tmp_path):
    _, a = run(tmp_path, "verify", "--set", "seed=3", name="a")
    _, b = run(tmp_path, "verify", "--set", "seed=3", name="b")
    assert (a / "verify_report.json").read_bytes() == (b / "verify_report.json").read_bytes()
