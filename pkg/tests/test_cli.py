import json
import math

import numpy as np
import pytest

from giantdf.cli import main
from giantdf.formats import format_layout, read_complex_matrix_csv, read_trajectory_csv
from giantdf.topology import braided, equally_spaced, layout_from_phases, serial

PI = math.pi


@pytest.fixture
def write_layout(tmp_path):
    def _write(layout, name="l.layout"):
        p = tmp_path / name
        p.write_text(format_layout(layout))
        return str(p)

    return _write


def _config(tmp_path, layout_path, extra="", name="run.cfg"):
    p = tmp_path / name
    p.write_text(
        f"[layout]\nfile={layout_path}\n[simulation]\ndt=0.01\nsteps=30\n"
        f"reference=effective\ninitial=eg\n{extra}"
    )
    return str(p)


@pytest.mark.parametrize(
    "layout,code,cls",
    [(braided(), 0, "braided"), (serial(), 0, "serial"), (serial(step=PI / 2), 2, "serial")],
)
def test_check_df_exit_codes(write_layout, capsys, layout, code, cls):
    assert main(["check-df", "--layout", write_layout(layout)]) == code
    out = capsys.readouterr().out
    assert ("DF: yes" if code == 0 else "DF: no") in out
    assert f"class: {cls}" in out


def test_missing_file_is_input_error(tmp_path, capsys):
    assert main(["check-df", "--layout", str(tmp_path / "none.layout")]) == 1
    assert "error" in capsys.readouterr().err


def test_malformed_layout_is_input_error(tmp_path):
    p = tmp_path / "bad.layout"
    p.write_text("point atom=0 phase=0\npoint atom=0 x=1\n")
    assert main(["check-df", "--layout", str(p)]) == 1


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as e:
        main(["check-df"])
    assert e.value.code == 1


def test_heff_serial_writes_zero_coupling(tmp_path, write_layout):
    out = tmp_path / "h"
    assert main(["heff", "--layout", write_layout(serial()), "--out", str(out)]) == 0
    J = read_complex_matrix_csv((out / "J.csv").read_text())
    assert J.shape == (2, 2) and np.max(np.abs(J)) <= 1e-13
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "heff"
    assert manifest["files"] == ["H_eff.csv", "J.csv", "J_pairsum.csv", "manifest.json"]


def test_heff_braided_spectrum(write_layout, capsys):
    assert main(["heff", "--layout", write_layout(braided())]) == 0
    out = capsys.readouterr().out
    assert "-1.000000000000, +1.000000000000" in out


def test_heff_three_point_sine_sum(write_layout, capsys):
    assert main(["heff", "--layout", write_layout(equally_spaced([0, 0, 0], 2 * PI / 3))]) == 0
    assert "sine sum 0.866025403784" in capsys.readouterr().out


def test_heff_non_df_is_flagged_diagnostic(write_layout, capsys):
    assert main(["heff", "--layout", write_layout(layout_from_phases([0, 0], [0, 1.0]))]) == 2
    out = capsys.readouterr().out
    assert "DF: no -- diagnostic only" in out
    assert "spectrum" in out


def test_simulate_and_overwrite_protection(tmp_path, write_layout, capsys):
    cfg = _config(tmp_path, write_layout(braided()))
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    first = (out / "trajectory.csv").read_text()
    data = read_trajectory_csv(first)
    assert len(data["t"]) == 31
    assert np.max(data["ref_distance"]) <= 0.02
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 1
    assert "refusing to overwrite" in capsys.readouterr().err
    assert main(["simulate", "--config", cfg, "--out", str(out), "--force"]) == 0
    assert (out / "trajectory.csv").read_text() == first


def test_simulate_tolerance_exit(tmp_path, write_layout):
    cfg = _config(tmp_path, write_layout(braided()))
    args = ["simulate", "--config", cfg, "--out", str(tmp_path / "s"), "--tol", "1e-12"]
    assert main(args) == 3


def test_simulate_requires_out(tmp_path, write_layout):
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--config", _config(tmp_path, write_layout(braided()))])
    assert e.value.code == 1


def test_simulate_engine_override(tmp_path, write_layout):
    cfg = _config(tmp_path, write_layout(braided(gamma_left=0.5)))
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--engine", "effective"]) == 0
    data = read_trajectory_csv((out / "trajectory.csv").read_text())
    assert np.max(data["ref_distance"]) <= 1e-12
    assert json.loads((out / "manifest.json").read_text())["engine"] == "effective"


def test_sweep_keeps_total_time(tmp_path, write_layout):
    cfg = _config(tmp_path, write_layout(braided()), "[sweep]\ndt=0.02,0.01\n")
    out = tmp_path / "sw"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    a = read_trajectory_csv((out / "sweep_000.csv").read_text())
    b = read_trajectory_csv((out / "sweep_001.csv").read_text())
    assert len(a["t"]) == 16 and len(b["t"]) == 31
    assert a["t"][-1] == pytest.approx(b["t"][-1])


def test_compile_circuit(tmp_path, capsys):
    target = tmp_path / "c.txt"
    assert main(["compile-circuit", "--gamma-dt", "0.01", "--out", str(target)]) == 0
    out = capsys.readouterr().out
    assert "gates: 6" in out and "iSWAP iterations N: 100" in out
    assert target.read_text().startswith("qubits 3\n")
    assert main(["compile-circuit", "--gamma-dt", "0.01", "--out", str(target)]) == 1


@pytest.mark.parametrize("gdt,extra,code", [("0.3", [], 1), ("0.3", ["--allow-large"], 0), ("0", [], 1)])
def test_compile_circuit_range(gdt, extra, code):
    assert main(["compile-circuit", "--gamma-dt", gdt] + extra) == code


def test_compile_general(tmp_path, write_layout, capsys):
    assert main(["compile-general", "--layout", write_layout(braided()), "--dt", "0.01"]) == 0
    assert "gates: 4, qubits: 3" in capsys.readouterr().out


def test_dispersive_demo(tmp_path, capsys):
    out = tmp_path / "d"
    args = ["dispersive-demo", "--g", "0.1", "--delta", "10", "--d", "3",
            "--t-max", "1000", "--n-times", "2001", "--out", str(out)]
    assert main(args) == 0
    assert "max population deviation" in capsys.readouterr().out
    data = read_trajectory_csv((out / "trajectory.csv").read_text())
    assert data["t"][-1] == pytest.approx(100.0)


def test_dispersive_demo_zero_detuning():
    assert main(["dispersive-demo", "--delta", "0"]) == 1


def test_verify(capsys):
    assert main(["verify", "--seed", "1"]) == 0
    assert "checks passed" in capsys.readouterr().out


def test_rerun_is_byte_identical(tmp_path, write_layout):
    lay = write_layout(braided(gamma_left=0.3))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["heff", "--layout", lay, "--out", str(a)]) == 0
    assert main(["heff", "--layout", lay, "--out", str(b)]) == 0
    for name in ("J.csv", "J_pairsum.csv", "H_eff.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
