import numpy as np
import pytest

from gk.cli import main
from gk.config import ConfigError, load_config

GOOD = """
[lattice]
d = 2
N = 32

[dynamics]
k = 4.0
scaling = fixed

[initial]
kind = circle
center = 0.5,0.5
r0 = 0.25
d0 = 0.06

[time]
t = 0.004
n_out = 2

[ensemble]
runs = 2
seed = 7
"""


def _write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_good_config(tmp_path):
    cfg = load_config(_write(tmp_path, GOOD))
    assert cfg.d == 2 and cfg.N == 32 and cfg.K == 4.0
    assert cfg.front_kind == "circle" and cfg.runs == 2
    assert cfg.t_grid[-1] == 0.004


def test_missing_file_raises():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.cfg")


def test_missing_lattice_section(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "[dynamics]\nk = 1\n"))


def test_bad_rates_rejected_before_compute(tmp_path):
    text = GOOD + "\n[rates]\na_plus = 0\nb_plus = 0\nc_plus = 1\na_minus = 0\nb_minus = 0\nc_minus = 1\n"
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, text))


def test_sqrt_log_scaling_resolves_K(tmp_path):
    text = GOOD.replace("k = 4.0", "delta = 1.2").replace(
        "scaling = fixed", "scaling = sqrt-log"
    )
    cfg = load_config(_write(tmp_path, text))
    assert abs(cfg.K - min(16.0, 1.2 * np.sqrt(np.log(32)))) < 1e-12
    cfg.require_sqrt_log_guard()


def test_growth_guard(tmp_path):
    text = GOOD.replace("k = 4.0", "k = 4000.0")
    cfg = load_config(_write(tmp_path, text))
    with pytest.raises(ConfigError):
        cfg.require_growth_guard()


def test_stripe_bounds_guard(tmp_path):
    text = GOOD.replace("kind = circle", "kind = stripe\nlo = 0.8\nhi = 0.2")
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, text))


def test_cli_config_error_exit_code(tmp_path):
    bad = _write(tmp_path, "[lattice]\nd = 0\nN = 8\n")
    rc = main(["hydro", "--config", str(bad), "--out", str(tmp_path / "out")])
    assert rc == 2


def test_cli_hydro_outputs(tmp_path):
    cfg = _write(tmp_path, GOOD)
    out = tmp_path / "hydro"
    rc = main(["hydro", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    assert (out / "hydro_report.csv").exists()
    assert list(out.glob("field_t*.csv"))


def test_cli_simulate_outputs_and_seed_override(tmp_path):
    cfg = _write(tmp_path, GOOD)
    out1 = tmp_path / "sim1"
    out2 = tmp_path / "sim2"
    assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
    assert (out1 / "pairings.csv").exists()
    assert (out1 / "site_means.csv").exists()
    assert main(["simulate", "--config", str(cfg), "--seed", "99", "--out", str(out2)]) == 0
    assert (out1 / "pairings.csv").read_text() != (out2 / "pairings.csv").read_text()


def test_cli_verify_passes(tmp_path):
    out = tmp_path / "verify"
    assert main(["verify", "--out", str(out)]) == 0
    text = (out / "verify_report.csv").read_text().strip().splitlines()
    assert text[0] == "check_name,max_residual,pass"
    assert all(line.endswith(",1") for line in text[1:])


def test_cli_wave_profile(tmp_path):
    cfg = _write(tmp_path, GOOD)
    out = tmp_path / "wave"
    assert main(["wave", "--config", str(cfg), "--out", str(out)]) == 0
    data = np.loadtxt(out / "wave_profile.csv", delimiter=",", skiprows=1)
    assert data.shape[1] == 2
    assert np.all(np.diff(data[:, 1]) >= -1e-12)


def test_cli_experiment_reproducible(tmp_path):
    cfg = _write(tmp_path, GOOD)
    out1, out2 = tmp_path / "e1", tmp_path / "e2"
    assert main(["experiment", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["experiment", "--config", str(cfg), "--out", str(out2)]) == 0
    for name in ("experiment_report.csv", "pairings.csv", "site_means.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
