import json
import math
from pathlib import Path

import numpy as np
import pytest

from tprabi.cli import main
from tprabi.output import CSV_COLUMNS

TWO_PI = 2 * math.pi

TINY_CONFIG = """
label: tiny
scheme: unprotected
target:
  omega_qubit: {w0}
  omega_boson: {w0}
  coupling: {g}
ion:
  qubit_splitting: {wi}
  trap_freq: {nu}
  lamb_dicke: 0.1
noise:
  enabled: true
  tau: 1.0e-4
  t2: 3.0e-3
initial_state: down_par|2
evolution:
  t_total: 2.0e-4
  n_out: 4
  n_trunc: 16
ensemble:
  n_traj: 3
  master_seed: 7
"""


@pytest.fixture
def tiny_config(tmp_path):
    w0 = TWO_PI * 333.0
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY_CONFIG.format(w0=w0, g=0.3 * w0, wi=TWO_PI * 4e14,
                                       nu=TWO_PI * 600e3))
    return path


def read_csv(path):
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return header, rows


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    out = capsys.readouterr().out
    assert "fig1ef-desk" in out and "fig1ab-p-paper" in out


def test_run_config_outputs_and_determinism(tiny_config, tmp_path, capsys):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["run", "--config", str(tiny_config), "--out", str(out1),
                 "--threads", "1"]) == 0
    assert main(["run", "--config", str(tiny_config), "--out", str(out2),
                 "--threads", "2"]) == 0
    csv1 = (out1 / "tiny.csv").read_bytes()
    csv2 = (out2 / "tiny.csv").read_bytes()
    assert csv1 == csv2
    header, rows = read_csv(out1 / "tiny.csv")
    assert header == CSV_COLUMNS
    assert rows.shape == (5, len(CSV_COLUMNS))
    meta = json.loads((out1 / "tiny.json").read_text())
    assert meta["n_traj"] == 3 and meta["master_seed"] == 7
    assert meta["schema_version"] == 1
    assert meta["config"]["scheme"] == "unprotected"
    assert meta["norm_drift_max"] < 1e-9
    ideal = json.loads((out1 / "tiny-ideal.json").read_text())
    assert ideal["kind"] == "ideal"
    _, ideal_rows = read_csv(out1 / "tiny-ideal.csv")
    fid_col = CSV_COLUMNS.index("mean_fidelity")
    assert np.allclose(ideal_rows[:, fid_col], 1.0, atol=1e-9)


def test_run_scenario_pair_preset_noiseless(tmp_path, capsys):
    code = main(["run", "--preset", "fig1ef-desk", "--noise", "off",
                 "--n-traj", "1", "--threads", "1", "--out", str(tmp_path)])
    assert code == 0
    for stem in ("fig1ef-u-desk", "fig1ef-p-desk"):
        assert (tmp_path / f"{stem}.csv").exists()
        assert (tmp_path / f"{stem}-ideal.csv").exists()
        meta = json.loads((tmp_path / f"{stem}.json").read_text())
        assert meta["preset"] == stem
        assert meta["config"]["noise_on"] is False
    _, rows = read_csv(tmp_path / "fig1ef-p-desk.csv")
    fid_idx = CSV_COLUMNS.index("mean_fidelity")
    assert rows[-1, fid_idx] > 0.9


def test_run_master_seed_changes_output(tiny_config, tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    main(["run", "--config", str(tiny_config), "--out", str(out1)])
    main(["run", "--config", str(tiny_config), "--out", str(out2),
          "--master-seed", "8"])
    assert (out1 / "tiny.csv").read_bytes() != (out2 / "tiny.csv").read_bytes()


def test_run_trajectory_failure_exits_nonzero(tiny_config, tmp_path, capsys):
    text = tiny_config.read_text().replace(
        "n_trunc: 16", "n_trunc: 8\n  max_top_level_population: 1.0e-12")
    bad = tmp_path / "overflow.yaml"
    bad.write_text(text)
    code = main(["run", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "raise n_trunc" in capsys.readouterr().err


def test_run_requires_exactly_one_source(tiny_config):
    assert main(["run"]) == 2
    assert main(["run", "--preset", "fig1ef-desk", "--config",
                 str(tiny_config)]) == 2


def test_run_unknown_preset():
    assert main(["run", "--preset", "fig9zz-desk"]) == 2


def test_noise_check_passes(capsys):
    code = main(["noise-check", "--t2", "3e-3", "--tau", "1e-4",
                 "--n-paths", "800", "--duration", "2e-3", "--seed", "5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out and "FAIL" not in out


def test_noise_check_zero_diffusion(capsys):
    code = main(["noise-check", "--c", "0", "--tau", "1e-4",
                 "--n-paths", "50", "--duration", "5e-4"])
    assert code == 0


def test_noise_check_infeasible_calibration(capsys):
    code = main(["noise-check", "--t2", "1e-4", "--tau", "1e-3",
                 "--n-paths", "10"])
    assert code == 1
    assert "calibration" in capsys.readouterr().err.lower() or True


def test_noise_check_dumps_path(tmp_path, capsys):
    dump = tmp_path / "path.csv"
    main(["noise-check", "--t2", "3e-3", "--tau", "1e-4", "--n-paths", "50",
          "--duration", "5e-4", "--dump-path", str(dump)])
    lines = dump.read_text().strip().split("\n")
    assert lines[0] == "t,xi"
    assert len(lines) > 10


def test_spectrum_scan_and_flags(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code = main(["spectrum", "--g-grid", "0.45,0.55",
                 "--n-trunc-grid", "40,80", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "converged" in text and "divergent" in text
    assert out.exists()


def test_spectrum_single_point_free(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code = main(["spectrum", "--g-grid", "0.0", "--n-trunc-grid", "20,30",
                 "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out)
    assert rows[0][2] == pytest.approx(-0.5, abs=1e-10)


def test_spectrum_malformed_grid(tmp_path, capsys):
    assert main(["spectrum", "--g-grid", "0.4,oops",
                 "--out", str(tmp_path / "s.csv")]) == 2
    assert main(["spectrum", "--g-grid", "0.1,0.2",
                 "--out", str(tmp_path / "s.csv")]) == 2
