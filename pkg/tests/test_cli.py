import csv
import subprocess
import sys

import numpy as np
import pytest

from liouvsim import cli


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def write_cfg(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return p


def test_parse_values():
    assert cli._parse_value("true") is True
    assert cli._parse_value("none") is None
    assert cli._parse_value("1, 2.5, x") == (1, 2.5, "x")
    assert cli._parse_value("3") == 3 and cli._parse_value("1e-3") == 1e-3
    assert cli._axis_map(("x0:4.0", "p0:0")) == {"x0": 4.0, "p0": 0.0}
    with pytest.raises(cli.ConfigError):
        cli._axis_map("x0")


def test_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(cli.ConfigError, match="unknown key"):
        cli.load_config(write_cfg(tmp_path, "[phase_space]\ng_z = 4\n"))
    with pytest.raises(cli.ConfigError, match="unknown group"):
        cli.load_config(write_cfg(tmp_path, "[weird]\na = 1\n"))
    assert cli.run("evolve", write_cfg(tmp_path, "[evolve]\nspeed = 3\n"), out=tmp_path) == 2


def test_default_config_loads():
    cfg = cli.load_config(None)
    assert cfg["phase_space"]["g_x"] == 8
    assert set(cfg) >= {"phase_space", "evolve", "cost", "poly", "dump", "grid_scan", "verify"}


def test_evolve_writes_trajectory(tmp_path):
    assert cli.run("evolve", out=tmp_path) == 0
    rows = read_csv(tmp_path / "trajectory.csv")
    assert [float(r["t"]) for r in rows] == [0.0, 2.0, 4.0]
    assert float(rows[0]["x0"]) == pytest.approx(4.0, abs=0.1)
    assert all(abs(float(r["norm"]) - 1) < 1e-3 for r in rows)


def test_cost_outputs(tmp_path):
    assert cli.run("cost", out=tmp_path) == 0
    rows = read_csv(tmp_path / "cost.csv")
    hit = [r for r in rows if r["name"] == "U_L" and r["alpha"] == "2" and r["t"] == "5" and r["eps"] == "9.9999999999999995e-07"]
    assert hit and hit[0]["value"] == "207"
    assert (tmp_path / "cost.md").read_text().startswith("| alpha |")


@pytest.mark.parametrize("kind", ["exp", "sign"])
def test_poly(tmp_path, kind):
    cfg = write_cfg(tmp_path, f"[poly]\nkind = {kind}\nalpha_t = 3\neps = 1e-6\ngamma = 0.2\nxi = 1e-3\nsamples = 41\n")
    assert cli.run("poly", cfg, out=tmp_path) == 0
    rows = read_csv(tmp_path / "poly.csv")
    assert len(rows) == 41
    if kind == "exp":
        err = max(abs(complex(float(r["target_re"]), float(r["target_im"])) - complex(float(r["poly_re"]), float(r["poly_im"]))) for r in rows)
        assert err <= 1e-6


def test_dump_block(tmp_path):
    cfg = write_cfg(tmp_path, "[phase_space]\nN = 1\nensemble = NVE\ng_x = 4\ng_p = 3\n[dump]\noperator = derivative_x\n")
    assert cli.run("dump", cfg, out=tmp_path) == 0
    rows = read_csv(tmp_path / "block.csv")
    m = np.zeros((12, 12))
    for r in rows:
        m[int(r["row"]), int(r["col"])] = float(r["re"])
    np.testing.assert_allclose(m, -m.T, atol=1e-14)
    bad = write_cfg(tmp_path, "[dump]\noperator = nothing\n")
    assert cli.run("dump", bad, out=tmp_path) == 2


def test_grid_scan(tmp_path):
    cfg = write_cfg(tmp_path, "[grid_scan]\nh = 0.1\nd = 1, 2\npoints = 8\nprecision = double\n")
    assert cli.run("grid-scan", cfg, out=tmp_path) == 0
    assert len(read_csv(tmp_path / "grid_scan.csv")) == 2
    assert len(read_csv(tmp_path / "grid_scan_fit.csv")) == 1


def test_verify_suites(tmp_path):
    assert cli.run("verify", out=tmp_path) == 0
    rows = read_csv(tmp_path / "verify.csv")
    assert {r["suite"] for r in rows} == {"contracts", "hamsim", "cost", "forces", "qae"}
    assert all(r["passed"] == "true" for r in rows)
    assert cli.run("verify", out=tmp_path, suite="cost") == 0


def test_verify_gsp(tmp_path):
    cfg = write_cfg(tmp_path, "[phase_space]\nN = 1\nensemble = NVE\ng_x = 4\ng_p = 3\nh_x = 0.375\n"
                              "[electronic]\nn_planewaves = 3\nh_el = 0.5\neps_prep = 1e-4\n")
    assert cli.run("verify", cfg, out=tmp_path, suite="gsp") == 0
    rows = read_csv(tmp_path / "verify_gsp.csv")
    assert len(rows) == 4 and all(float(r["fidelity"]) >= 1 - 1e-4 for r in rows)


def test_thermo_command(tmp_path):
    cfg = write_cfg(tmp_path, """
[phase_space]
N = 1
ensemble = NVT
g_x = 4
g_p = 3
g_s = 3
g_ps = 3
well_charge = 1.0
well_center = 1.5
[alchemy]
n_lambda = 2
t_eq = 0.3
eps = 0.05
mode = ideal
widths = x0:1.0, p0:1.0, s:0.5, ps:0.5
[alchemy.system_b.phase_space]
masses = 2.0
""")
    assert cli.run("thermo", cfg, out=tmp_path) == 0
    text = (tmp_path / "thermo_result.txt").read_text()
    assert "delta_f:" in text and "ledger.eps_disc:" in text
    assert len(read_csv(tmp_path / "thermo_lambda.csv")) == 2


def test_dimension_cap_exit_code(tmp_path, monkeypatch):
    monkeypatch.setenv("LIOUV_MAX_DIM", "32")
    assert cli.run("evolve", out=tmp_path) == 3


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "liouvsim.cli", "cost", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "U_L" in out.stdout
    bad = subprocess.run([sys.executable, "-m", "liouvsim.cli", "cost", "extra"], capture_output=True, text=True)
    assert bad.returncode == 2
