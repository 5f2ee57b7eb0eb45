"""Config parsing, CLI subcommands, output formats and determinism."""
import hashlib

import numpy as np
import pytest

from frachelm.cli import main
from frachelm.config import ExperimentConfig, parse_config
from frachelm.errors import ConfigParseError, ConfigValidationError
from frachelm.fieldgrid import read_field
from frachelm.greens import phi1
from frachelm.params import ScatteringParams


class TestParseConfig:
    def test_empty_text_rejected(self):
        with pytest.raises(ConfigParseError):
            parse_config("")

    def test_minimal_config_echoes_defaults(self):
        cfg = parse_config("s = 0.9\n")
        assert cfg["s"] == 0.9
        assert cfg["k"] == 8.0  # default
        assert cfg["grid.n"] == 32

    def test_out_of_range_s_rejected(self):
        with pytest.raises(ConfigValidationError, match="admissible range"):
            parse_config("s = 0.5\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigValidationError, match="unknown key"):
            parse_config("s = 0.9\nwibble = 3\n")

    def test_malformed_line_carries_number(self):
        with pytest.raises(ConfigParseError) as err:
            parse_config("s = 0.9\nnonsense without equals\n")
        assert err.value.line == 2

    def test_comments_and_vectors(self):
        cfg = parse_config("# header\ns = 0.85  # inline\nincident.theta = 0,1,0\n")
        assert cfg["incident.theta"] == (0.0, 1.0, 0.0)

    def test_round_trip(self):
        cfg = parse_config("s = 0.85\ngrid.n = 16\nsolver.tol = 2e-9\n")
        again = parse_config(cfg.emit())
        assert cfg == again
        assert cfg.digest() == again.digest()

    def test_nonunit_theta_rejected(self):
        with pytest.raises(ConfigValidationError):
            parse_config("incident.theta = 0,0,2\n")


def run_cli(*argv):
    return main(list(argv))


def test_greens_csv_matches_closed_form(tmp_path, capsys):
    code = run_cli("greens", "--s", "1.0", "--k", "2.0", "--r", "0.5,1.0,2.0",
                   "--method", "pv")
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "r,re,im,est_error,method"
    params = ScatteringParams(s=1.0, k=2.0)
    for line in lines[1:]:
        r, re, im, err, method = line.split(",")
        ref = phi1(float(r), params)
        assert complex(float(re), float(im)) == pytest.approx(ref, rel=1e-6)
        assert method == "principal-value"


def test_greens_range_and_file_output(tmp_path):
    out = tmp_path / "kernel.csv"
    code = run_cli("greens", "--s", "0.9", "--k", "1.0", "--r", "1:4:5",
                   "--out", str(out))
    assert code == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 6
    assert rows[1].split(",")[4] == "subordination"


def test_incident_writes_field(tmp_path):
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text(f"grid.n = 16\nk = 4.0\noutput.dir = {tmp_path}\n")
    code = run_cli("incident", "--type", "plane", "--config", str(cfgfile))
    assert code == 0
    f, meta = read_field(tmp_path / "incident.fhf")
    assert f.grid.n == 16
    assert np.allclose(np.abs(f.values), 0.1)
    assert meta["kind"] == "plane"


def test_incident_herglotz_bump(tmp_path):
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text(f"grid.n = 16\nk = 3.0\nincident.order = 8\n"
                       f"incident.density = bump\noutput.dir = {tmp_path}\n")
    assert run_cli("incident", "--type", "herglotz", "--config", str(cfgfile)) == 0
    f, meta = read_field(tmp_path / "incident.fhf")
    assert meta["kind"] == "herglotz"
    assert np.all(np.isfinite(f.values.view(float)))
    assert (tmp_path / "manifest.txt").exists()


FORWARD_CFG = """
s = 0.9
k = 4.0
grid.n = 16
potential.kind = {kind}
incident.amplitude = 0.1
solver.tol = 1e-9
output.dir = {out}
"""


def test_forward_zero_potential_zero_scattered(tmp_path):
    cfg = tmp_path / "fwd.cfg"
    cfg.write_text(FORWARD_CFG.format(kind="zero", out=tmp_path))
    assert run_cli("forward", "--config", str(cfg)) == 0
    u_sc, _ = read_field(tmp_path / "u_sc.fhf")
    assert np.all(u_sc.values == 0)
    report = (tmp_path / "forward_report.txt").read_text()
    assert "iterations = 1" in report
    assert (tmp_path / "manifest.txt").exists()


def test_forward_determinism(tmp_path):
    digests = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        out.mkdir()
        cfg = tmp_path / f"{sub}.cfg"
        cfg.write_text(FORWARD_CFG.format(kind="stock", out=out))
        assert run_cli("forward", "--config", str(cfg)) == 0
        digests.append(hashlib.sha256((out / "u_sc.fhf").read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_forward_with_k_schedule(tmp_path):
    cfg = tmp_path / "fwd.cfg"
    cfg.write_text(FORWARD_CFG.format(kind="stock", out=tmp_path)
                   + "k_schedule = 3,4.5,6\n")
    assert run_cli("forward", "--config", str(cfg)) == 0
    report = (tmp_path / "forward_report.txt").read_text()
    assert "k_decay_slope = " in report
    slope = float([ln for ln in report.splitlines()
                   if ln.startswith("k_decay_slope")][0].split("=")[1])
    assert np.isfinite(slope)


def test_farfield_csv(tmp_path):
    cfg = tmp_path / "ff.cfg"
    cfg.write_text(FORWARD_CFG.format(kind="stock", out=tmp_path)
                   + "farfield.directions = 4\n")
    assert run_cli("farfield", "--config", str(cfg)) == 0
    rows = (tmp_path / "farfield.csv").read_text().strip().splitlines()
    assert rows[0] == "k,xhat_x,xhat_y,xhat_z,theta_x,theta_y,theta_z,a,re,im"
    assert len(rows) == 5
    vals = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    assert np.allclose(vals[:, 0], 4.0)
    assert np.all(np.isfinite(vals))


def test_invert_synthetic_born(tmp_path):
    cfg = tmp_path / "inv.cfg"
    cfg.write_text(
        f"s = 0.9\nk = 8.0\ngrid.n = 16\npotential.kind = stock\n"
        f"probes.oracle = synthetic-born\nprobes.n = 16\nprobes.l_min = 16\n"
        f"output.dir = {tmp_path}\n")
    assert run_cli("invert", "--config", str(cfg)) == 0
    q_rec, meta = read_field(tmp_path / "q_rec.fhf")
    assert q_rec.grid.n == 16
    report = dict(line.split(",") for line in
                  (tmp_path / "invert_report.csv").read_text().strip().splitlines()[1:])
    assert float(report["rel_l2_error"]) < 0.05
    assert int(report["probes"]) == (16 ** 3 - 8) // 2 + 8


def test_invert_from_farfield_csv(tmp_path):
    # record Born far-field values during a sweep, write them in the CSV wire
    # format, and check the from-file oracle reproduces the reconstruction
    from frachelm.farfield import BornFarFieldOracle
    from frachelm.fieldgrid import BoxGrid, stock_potential
    from frachelm.inverse import sweep_and_reconstruct

    src = stock_potential(BoxGrid(1.0, 16))
    born = BornFarFieldOracle(src)
    rows = []

    def recording(k, x_hat, theta, a):
        val = born(k, x_hat, theta, a)
        rows.append((k, *x_hat, *theta, a, val.real, val.imag))
        return val

    rec_grid = BoxGrid(1.0, 16)
    direct = sweep_and_reconstruct(recording, rec_grid, 0.05, k0=1.0,
                                   l_min=16.0, l_scale=1.0)
    csv = tmp_path / "ff.csv"
    header = "k,xhat_x,xhat_y,xhat_z,theta_x,theta_y,theta_z,a,re,im"
    csv.write_text(header + "\n" + "\n".join(
        ",".join(repr(float(c)) for c in row) for row in rows) + "\n")

    cfg = tmp_path / "inv.cfg"
    cfg.write_text(
        f"s = 0.9\ngrid.n = 16\npotential.kind = stock\n"
        f"probes.oracle = from-file\nprobes.file = {csv}\nprobes.n = 16\n"
        f"probes.l_min = 16\nprobes.l_scale = 1.0\nprobes.a = 0.05\n"
        f"output.dir = {tmp_path}\n")
    assert run_cli("invert", "--config", str(cfg)) == 0
    q_rec, _ = read_field(tmp_path / "q_rec.fhf")
    assert np.max(np.abs(q_rec.values.real - direct.q_rec)) < 1e-10


def test_invert_requires_admissible_s(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("s = 0.78\npotential.kind = stock\n"
                   "probes.oracle = synthetic-born\nprobes.n = 8\n")
    assert run_cli("invert", "--config", str(cfg)) == 1


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("s = 0.5\n")
    assert run_cli("forward", "--config", str(cfg)) == 1


def test_numerical_failure_exit_code(tmp_path):
    # amplitude far outside the contraction regime -> solver refuses -> 2
    cfg = tmp_path / "big.cfg"
    cfg.write_text(FORWARD_CFG.format(kind="stock", out=tmp_path)
                   + "incident.amplitude = 8.0\n")
    assert run_cli("forward", "--config", str(cfg)) == 2


def test_farfield_csv_determinism(tmp_path):
    digests = []
    for sub in ("p", "q"):
        out = tmp_path / sub
        out.mkdir()
        cfg = tmp_path / f"{sub}.cfg"
        cfg.write_text(FORWARD_CFG.format(kind="stock", out=out)
                       + "farfield.directions = 4\n")
        assert run_cli("farfield", "--config", str(cfg)) == 0
        digests.append(hashlib.sha256((out / "farfield.csv").read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_verify_single_criterion(capsys):
    assert run_cli("verify", "--criteria", "1") == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS criterion  1")


def test_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACHELM_OUTDIR", str(tmp_path / "envout"))
    cfg = tmp_path / "fwd.cfg"
    cfg.write_text("s = 0.9\nk = 4.0\ngrid.n = 16\npotential.kind = zero\n"
                   "solver.tol = 1e-9\n")
    assert run_cli("forward", "--config", str(cfg)) == 0
    assert (tmp_path / "envout" / "u_sc.fhf").exists()
