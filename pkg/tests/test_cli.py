import json
import subprocess
import sys

import pytest

from openchain.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from openchain.experiments import read_csv

FAST = {"M_left": 6, "M_right": 6, "t_max": 2.0, "t_step": 0.5, "compare_time": 2.0}


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_steady_sweep(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {**FAST, "g": [0.1, 0.2], "T_right": 1.0})
    assert main(["steady-sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    cols = read_csv((tmp_path / "o" / "steady-fidelity-vs-g.csv").read_text())
    assert list(cols) == ["g", "F"] and list(cols["g"]) == [0.1, 0.2]
    assert "steady-fidelity-vs-g.meta.json" in capsys.readouterr().out


def test_output_dir_from_config_and_flags(tmp_path):
    out = tmp_path / "from-config"
    cfg = write(tmp_path, "c.json", {**FAST, "g": 0.1, "output": {"dir": str(out)}})
    assert main(["timeseries", "--config", cfg, "--which", "global", "--format", "json", "--svg"]) == EXIT_OK
    body = json.loads((out / "exact-timeseries.json").read_text())
    assert list(body["columns"]) == ["t", "F_glb"]
    assert (out / "exact-timeseries.svg").exists()


def test_gc_and_gc_scan(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"T_right": 10.0, "gc": {"scan_points": 3}})
    assert main(["gc", "--config", cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    cols = read_csv((tmp_path / "a" / "gc-vs-Tr.csv").read_text())
    assert list(cols) == ["T_l", "T_r", "g_c"] and cols["g_c"][0] == 0.0
    assert "global-everywhere" in capsys.readouterr().err
    multi = write(tmp_path, "m.json", {**FAST, "T_right": [1.0, 10.0], "gc": {"scan_points": 3, "tol": 0.1}})
    assert main(["gc", "--config", multi, "--out", str(tmp_path / "b")]) == EXIT_CONFIG
    assert main(["gc-scan", "--config", multi, "--out", str(tmp_path / "b"), "--jobs", "2"]) == EXIT_OK
    assert len(read_csv((tmp_path / "b" / "gc-vs-Tr.csv").read_text())["g_c"]) == 2


def test_above_interval_is_reported(tmp_path, capsys):
    # a bracket entirely below the crossing: the local approach wins everywhere on it
    cfg = write(tmp_path, "c.json", {"T_right": 1.0, "gc": {"bracket": [1e-3, 5e-3], "scan_points": 2}})
    assert main(["gc", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    err = capsys.readouterr().err
    assert "above-interval" in err and "lower bound" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["steady-sweep"],
        ["steady-sweep", "--config", "/nonexistent/cfg.json", "--out", "x"],
        ["steady-sweep", "--out", "x", "--jobs", "0"],
    ],
)
def test_config_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == EXIT_CONFIG


def test_invalid_values_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"g": 0.9})
    assert main(["steady-sweep", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_unwritable_output_exit_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write(tmp_path, "c.json", {**FAST, "g": 0.1})
    assert main(["steady-sweep", "--config", cfg, "--out", str(blocker / "sub")]) == EXIT_CONFIG


def test_numerical_failure_exit_3(tmp_path, capsys):
    # at g = 0 the middle oscillator is undamped, so the local steady state is not unique
    cfg = write(tmp_path, "c.json", {"g": 0.0, "T_right": 1.0})
    assert main(["steady-sweep", "--config", cfg, "--out", str(tmp_path)]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_rerun_from_sidecar(tmp_path):
    cfg = write(tmp_path, "c.json", {**FAST, "g": 0.2, "T_right": 3.0})
    assert main(["timeseries", "--config", cfg, "--out", str(tmp_path / "a"), "--svg"]) == EXIT_OK
    sidecar = str(tmp_path / "a" / "exact-timeseries.meta.json")
    assert main(["timeseries", "--config", sidecar, "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("exact-timeseries.csv", "exact-timeseries.meta.json", "exact-timeseries.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_selftest(capsys):
    assert main(["selftest"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and all(line.startswith("PASS") for line in lines)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "openchain", "selftest"], capture_output=True, text=True)
    assert proc.returncode == 0 and "FAIL" not in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "openchain", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
