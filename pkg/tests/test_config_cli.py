import json
import os
import subprocess
import sys

import pytest

from frengate import cli
from frengate.config import SCHEMAS, build_params, load_file, resolve
from frengate.errors import ConfigError
from frengate.io import sha256


def test_resolve_fills_defaults_and_rejects_unknown():
    cfg = resolve("scatter", {"beta": 2e-6})
    assert cfg["beta"] == 2e-6 and cfg["alpha"] == SCHEMAS["scatter"]["alpha"]
    with pytest.raises(ConfigError):
        resolve("scatter", {"betta": 1})
    with pytest.raises(ConfigError):
        resolve("scatter", {"params": {"Gama": 1}})
    with pytest.raises(ConfigError):
        resolve("nope", {})


def test_resolve_comb_and_ratio_defaults():
    cfg = resolve("qudit", {"comb": {"fsr": 2e-5}})
    assert cfg["comb"]["fsr"] == 2e-5 and cfg["comb"]["peak_width"] == 1e-6
    assert cfg["params"]["Gamma"] == 2e-4
    assert resolve("tradeoff", {})["ratios"][0] == 0.1


def test_build_params_binding_rules():
    assert build_params({}).omega_X == pytest.approx(0.5025)
    assert build_params({"delta_X": 0.001}).omega_X == pytest.approx(0.5005)
    assert build_params({"omega_X": 0.51}).delta_X == pytest.approx(0.02)
    with pytest.raises(ConfigError):
        build_params({"omega_X": 0.51, "delta_X": 0.5})


def test_load_file_formats(tmp_path):
    (tmp_path / "a.toml").write_text("alpha = 2e-6\n[params]\nGamma = 1e-4\n")
    (tmp_path / "a.json").write_text('{"alpha": 2e-6}')
    (tmp_path / "a.yaml").write_text("alpha: 1")
    (tmp_path / "bad.toml").write_text("alpha = = 1")
    assert load_file(tmp_path / "a.toml")["params"]["Gamma"] == 1e-4
    assert load_file(tmp_path / "a.json")["alpha"] == 2e-6
    for name in ("a.yaml", "bad.toml", "missing.toml"):
        with pytest.raises(ConfigError):
            load_file(tmp_path / name)


def run_cli(tmp_path, command, config, *extra):
    tmp_path.mkdir(parents=True, exist_ok=True)
    cfg = tmp_path / f"{command}.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / command
    code = cli.main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def check_manifest(out, command):
    m = json.loads((out / "manifest.json").read_text())
    assert m["command"] == command and m["version"]
    for name, digest in m["files"].items():
        assert sha256(out / name) == digest
    return m


def test_scatter_command(tmp_path):
    code, out = run_cli(tmp_path, "scatter", {"n": 128})
    assert code == 0
    m = check_manifest(out, "scatter")
    assert "output_MM.csv" in m["files"] and "scatter.json" in m["files"]
    s = json.loads((out / "scatter.json").read_text())
    assert 0 < s["p_success"] < 0.75


def test_scatter_is_byte_identical_on_rerun(tmp_path):
    _, a = run_cli(tmp_path / "a", "scatter", {"n": 96})
    _, b = run_cli(tmp_path / "b", "scatter", {"n": 96})
    for name in json.loads((a / "manifest.json").read_text())["files"]:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_schmidt_command_writes_requested_modes(tmp_path):
    code, out = run_cli(tmp_path, "schmidt", {"n": 128, "count": 30, "source": "input"})
    assert code == 0
    header = (out / "schmidt_modes1.csv").read_text().splitlines()[0]
    assert header == "omega,mode1_re,mode1_im,mode3_re,mode3_im,mode5_re,mode5_im"
    s = json.loads((out / "schmidt.json").read_text())
    assert s["schmidt_number"] == pytest.approx(1.0, abs=1e-6)


def test_tradeoff_command_json_format(tmp_path):
    code, out = run_cli(tmp_path, "tradeoff", {"ratios": [0.5, 2.0], "n": 96, "count": 20},
                        "--format", "json")
    assert code == 0
    data = json.loads((out / "tradeoff.json").read_text())
    assert [r["ratio"] for r in data["rows"]] == [0.5, 2.0]


def test_decay_command_scales_rate(tmp_path):
    cfg = {"n_freq": 60, "t_max": 2e4}
    code, out = run_cli(tmp_path, "decay", cfg, "--omega2x-hz", "1e12")
    assert code == 0
    m = check_manifest(out, "decay")
    assert m["omega2x_hz"] == 1e12
    assert (out / "trajectory.csv").read_text().startswith("t,p0,px,p2x,norm\n")


def test_regime_command_default_case_passes(tmp_path):
    code, out = run_cli(tmp_path, "regime", {})
    assert code == 0
    assert json.loads((out / "regime.json").read_text())["all_pass"] is True


def test_optimize_mode_command(tmp_path):
    code, out = run_cli(tmp_path, "optimize-mode", {"n": 60})
    assert code == 0
    s = json.loads((out / "optimize_mode.json").read_text())
    assert s["anticorrelated"] is True
    assert {"mode_omega.csv", "mode_profile.csv"} <= set(check_manifest(out, "optimize-mode")["files"])


@pytest.mark.parametrize("config,code", [({"bogus": 1}, 2), ({"alpha": -1.0}, 3),
                                         ({"params": {"Gamma": -1.0}}, 2)])
def test_exit_codes(tmp_path, config, code, capsys):
    got, _ = run_cli(tmp_path, "scatter", config)
    assert got == code
    assert "frengate scatter" in capsys.readouterr().err


def test_unstable_step_exit_code(tmp_path):
    code, _ = run_cli(tmp_path, "decay", {"n_freq": 60, "t_max": 2e4, "step": 4000.0})
    assert code == 2


def test_convergence_failure_exit_code(tmp_path, monkeypatch):
    from frengate import dynamics
    monkeypatch.setattr(dynamics, "DRIFT_ABORT", 0.0)
    code, _ = run_cli(tmp_path, "decay", {"n_freq": 60, "t_max": 2e4})
    assert code == 4


def test_bad_scale_rejected(tmp_path):
    code, _ = run_cli(tmp_path, "regime", {}, "--omega2x-hz", "-5")
    assert code == 2


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("FRENGATE_THREADS", "2")
    for var in cli.THREAD_VARS:
        monkeypatch.delenv(var, raising=False)
    cli._cap_threads()
    assert all(os.environ[v] == "2" for v in cli.THREAD_VARS)
    monkeypatch.setenv("FRENGATE_THREADS", "zero")
    with pytest.raises(ConfigError):
        cli._cap_threads()


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "frengate.cli", "regime", "--out", str(tmp_path / "r")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "all_pass: True" in r.stdout
