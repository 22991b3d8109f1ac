"""Command-line runner, configuration handling and run manifests."""

from __future__ import annotations

import json
import shutil
import subprocess

import numpy as np
import pytest

from lgtq import __version__
from lgtq.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main
from lgtq.config import DEFAULTS, PRESETS, ConfigError, leaf_keys, load_config, resolve_raw
from lgtq.group_core import group_to_json, make_q8

GRID = "[0.5, 0.25, 0.125, 0.0625, 0.03125]"


def run(tmp_path, *args, name="run"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_presets_validate(preset):
    cfg = load_config(preset)
    assert cfg.experiment == preset
    assert cfg.hardware.omega_T == pytest.approx(300.0)


def test_fig3_preset_values():
    cfg = load_config("fig3")
    assert cfg.model.lambda_E == 2.88 and cfg.trotter["dt"] == pytest.approx(1 / 3)
    assert cfg.trotter["n_steps"] == 15 and cfg.gate_source == "pulse_simulated"


def test_overrides_apply():
    cfg = load_config("fig2", {"hardware.V_ratio": 50, "model.lambda_B": 0.5})
    assert cfg.hardware.V_ratio == pytest.approx(50) and cfg.model.lambda_B == 0.5


@pytest.mark.parametrize("overrides", [
    {"hardware.bogus": 1}, {"model.lambda_E": 0}, {"trotter.order": 3}, {"hardware.omega_T": -5},
    {"initial_state": [0, 0, 9, 0]}, {"gate_source": "missing_bank.json"}, {"trotter.faulty_scope": "some"},
    {"error_scan.gate": "plaquette"}, {"assert_checks": "yes"}, {"trotter.n_steps": 1.5},
])
def test_invalid_configs_raise(overrides):
    with pytest.raises(ConfigError):
        load_config(None, overrides)


def test_config_file_with_preset_and_relative_paths(tmp_path):
    (tmp_path / "groups").mkdir()
    (tmp_path / "groups" / "q8.json").write_text(group_to_json(make_q8()))
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"preset": "fig3", "group": "groups/q8.json", "trotter": {"n_steps": 3}}))
    cfg = load_config(path)
    assert cfg.experiment == "fig3" and cfg.trotter["n_steps"] == 3 and cfg.group.order == 8


def test_unknown_config_source():
    with pytest.raises(ConfigError):
        resolve_raw("no_such_preset")


def test_leaf_keys_cover_defaults():
    keys = leaf_keys()
    assert "hardware.V_ratio" in keys and "trotter.dt_lambda_B_grid" in keys
    assert len(keys) == len(set(keys))
    assert set(DEFAULTS) >= {k.split(".")[0] for k in keys}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def test_group_check_q8(tmp_path, capsys):
    code, out = run(tmp_path, "group-check")
    assert code == EXIT_OK
    m = manifest(out)
    assert m["passed"] and m["command"] == "group-check" and m["version"] == __version__
    assert set(m["checks"]) >= {"axioms", "theta_composition", "q8_cayley", "q8_inverse", "q8_characters"}
    assert "group_report.json" in m["outputs"]
    assert "PASS axioms" in capsys.readouterr().out


def test_group_check_corrupted_table(tmp_path, capsys):
    data = json.loads(group_to_json(make_q8()))
    row = data["cayley"][2]
    row[4], row[5] = row[5], row[4]
    (tmp_path / "bad.json").write_text(json.dumps(data))
    code, out = run(tmp_path, "group-check", "--group", str(tmp_path / "bad.json"))
    assert code == EXIT_CHECK
    report = json.loads((out / "group_report.json").read_text())
    assert report["associativity_failures"] and "associativity" in report["summary"]
    assert "FAIL axioms" in capsys.readouterr().out


def test_group_check_other_group(tmp_path):
    from lgtq.group_core import make_cyclic

    (tmp_path / "z4.json").write_text(group_to_json(make_cyclic(4)))
    code, out = run(tmp_path, "group-check", "--group", str(tmp_path / "z4.json"))
    assert code == EXIT_OK
    assert "q8_cayley" not in manifest(out)["checks"]


@pytest.mark.parametrize("args", [
    ["group-check", "--config", "missing.json"],
    ["group-check", "--group", "missing.json"],
    ["cost-report", "--hardware.omega_T", "-1"],
    ["cost-report", "--set", "model.nothing=1"],
    ["cost-report", "--set", "no_equals_sign"],
    ["frobnicate"],
])
def test_config_errors_exit_2(tmp_path, args, capsys):
    code, out = run(tmp_path, *args)
    assert code == EXIT_CONFIG
    assert not out.exists()


def test_invalid_json_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = run(tmp_path, "cost-report", "--config", str(bad))
    assert code == EXIT_CONFIG


def test_cost_report(tmp_path):
    code, out = run(tmp_path, "cost-report", "--config", "fig3")
    assert code == EXIT_OK
    rep = json.loads((out / "cost_report.json").read_text())
    assert rep["theta_pulse_pairs_formula"] == 210
    assert rep["qubit_theta_entangling_gates"] == 349
    assert rep["qubit_theta_entangling_gates_c_iy"] == 532
    assert rep["toffoli_costs"] == {"2": 5, "3": 13, "4": 29}
    counts = json.loads((out / "counts.json").read_text())
    assert [c["entangling_count"] for c in counts] == [349, 532, 2099, 3200]
    assert (out / "cost_report.png").stat().st_size > 0
    m = manifest(out)
    assert sorted(m["outputs"]) == sorted(p.name for p in out.iterdir())


def test_assert_checks_false_downgrades_failures(tmp_path):
    data = json.loads(group_to_json(make_q8()))
    data["char_fund"][2] = 1.0
    (tmp_path / "bad.json").write_text(json.dumps(data))
    code, out = run(tmp_path, "group-check", "--group", str(tmp_path / "bad.json"), "--assert_checks", "false")
    assert code == EXIT_OK
    assert manifest(out)["passed"] is False


def test_trotter_scan_deterministic(tmp_path):
    args = ["trotter-scan", "--trotter.dt_lambda_B_grid", GRID]
    code1, out1 = run(tmp_path, *args, name="a")
    code2, out2 = run(tmp_path, *args, name="b")
    assert code1 == code2 == EXIT_OK
    csv1 = (out1 / "trotter_scan.csv").read_text()
    assert csv1 == (out2 / "trotter_scan.csv").read_text()
    rows = [line.split(",") for line in csv1.splitlines()[1:]]
    assert len(rows) == 5
    eps = np.array([float(r[2]) for r in rows])
    assert np.all(np.diff(eps) < 0)
    m = manifest(out1)
    assert m["checks"] == {"slope": True}
    assert m["results"]["slope"] == pytest.approx(4.0, abs=0.3)
    assert m["config"]["trotter"]["dt_lambda_B_grid"] == json.loads(GRID)


def test_console_script_available():
    exe = shutil.which("lgtq")
    if exe is None:
        pytest.skip("console script not installed")
    res = subprocess.run([exe, "--version"], capture_output=True, text=True, check=False)
    assert res.returncode == 0 and __version__ in res.stdout
