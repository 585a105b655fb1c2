import csv
import json
import subprocess
import sys

import pytest

from stpgame.cli import RunConfig, config_from_args, main
from stpgame.errors import SchemaError


def run_cli(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    code = main([*args, "--output", str(out)])
    data = json.loads(out.read_text()) if out.exists() else None
    return code, data, out


def test_config_validation():
    with pytest.raises(SchemaError, match="^gamma_grid: empty grid"):
        RunConfig("hinf-sweep", "x", "y", gamma_grid=())
    with pytest.raises(SchemaError, match="strictly increasing"):
        RunConfig("hinf-sweep", "x", "y", gamma_grid=(2.0, 2.0))
    with pytest.raises(SchemaError, match="tolerance_overrides"):
        RunConfig("lqr", "x", "y", tolerance_overrides={"speed": 1.0})
    with pytest.raises(SchemaError, match="input_path"):
        RunConfig("lqr", None, "y")
    assert RunConfig("repro-paper", None, "y").input_path is None


def test_args_parsing():
    cfg = config_from_args(["hinf-sweep", "--input", "p", "--output", "o", "--gamma-grid", "1.5, 2,3",
                            "--tol", "cond_max=1e10"])
    assert cfg.gamma_grid == (1.5, 2.0, 3.0)
    assert cfg.tolerance_overrides == {"cond_max": 1e10}
    with pytest.raises(SchemaError, match="gamma_grid"):
        config_from_args(["hinf-sweep", "--input", "p", "--output", "o", "--gamma-grid", ""])


def test_empty_grid_exit_code(tmp_path, capsys):
    code, _, _ = run_cli(tmp_path, "hinf-sweep", "--input", "paper-sec8-plant", "--gamma-grid", ",")
    assert code == 2
    assert "gamma_grid" in capsys.readouterr().err


def test_bad_input_points_to_field(tmp_path, capsys):
    bad = tmp_path / "plant.json"
    bad.write_text(json.dumps({k: [[1.0]] for k in "ABCDEG"}))
    code, _, _ = run_cli(tmp_path, "hinf-solve", "--input", str(bad), "--gamma", "2")
    assert code == 2
    assert "H: missing" in capsys.readouterr().err


def test_module_error_exit_code(tmp_path, capsys):
    code, _, _ = run_cli(tmp_path, "lqr", "--input", str(_write(tmp_path, "l.json", {
        "A": [[0.5]], "B": [[1.0]], "Q": [[1.0]], "R": [[3.0]]})))
    assert code == 1
    assert "ConvergenceError" in capsys.readouterr().err


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_stp_check(tmp_path):
    src = _write(tmp_path, "ops.json", {
        "operands": [{"rows": 2, "col_indices": [1, 2, 2, 2]}, [[1.0], [0.0]], [[0.0], [1.0]]],
        "law_draws": 20, "seed": 3,
    })
    code, data, _ = run_cli(tmp_path, "stp-check", "--input", str(src))
    assert code == 0
    # AND of true and false; dense operands give a dense result
    assert data["result"] == {"rows": 2, "cols": 1, "entries": [0.0, 1.0]}
    assert data["reference_max_abs_diff"] == 0.0
    assert data["predicted_shape"] == data["result_shape"] == [2, 1]
    assert all(v["ok"] for v in data["laws"].values())


def test_boolnet_bundled(tmp_path):
    code, data, _ = run_cli(tmp_path, "boolnet", "--input", "boolean-mn1")
    assert code == 0
    assert data["optimal_fixed_point"]["verified"] is True
    assert data["trajectory"]["states"][0] == 1
    assert data["optimal_fixed_point"]["rhs_shape"] == [2, 1]


def test_lqr_bundled(tmp_path):
    code, data, _ = run_cli(tmp_path, "lqr", "--input", "lqr-scalar")
    assert code == 0 and data["kernel_symmetric"] is True
    assert data["solution"]["bellman_residual_norm"] < 1e-8


def test_nash_bundled(tmp_path):
    code, data, out = run_cli(tmp_path, "nash", "--input", "game-2p-scalar")
    assert code == 0
    assert max(data["stagewise_residuals"].values()) < 1e-9
    rows = list(csv.DictReader(out.with_suffix(".csv").open()))
    assert set(rows[0]) == {"player", "stage", "delta", "cost_change"}
    assert len(rows) == 2 * 2 * 4


def test_hinf_solve_records_singular_parts(tmp_path):
    code, data, _ = run_cli(tmp_path, "hinf-solve", "--input", "paper-sec8-plant", "--gamma", "3")
    assert code == 0
    assert data["S_inv"]["entries"][0] == pytest.approx(-8 / 27, abs=1e-11)
    assert "Gamma" in data["errors"]["riccati_form"]
    assert "(I-A)" in data["errors"]["closed_form_gain"]
    assert data["gamma_report"]["rho_MS"] == pytest.approx(3.375, abs=1e-9)


def test_hinf_sweep_csv(tmp_path):
    code, data, out = run_cli(tmp_path, "hinf-sweep", "--input", "paper-sec8-plant", "--gamma-grid", "1,1.5,3")
    assert code == 0
    assert "error" in data["reports"][0]
    lines = out.with_suffix(".csv").read_text().splitlines()
    assert lines[0] == "gamma,rho_MS,rho_SigmaTildeS,rho_SigmaQ,rho_SigmaSbar,branch1,branch2"
    assert lines[1] == "1.00000000000e+00,,,,,,"
    assert len(lines) == 4


@pytest.mark.parametrize("condition, bracket, status", [
    ("MS", "1.01,10", "match"),
    ("SigmaQ", "1.01,10", "match"),
    ("SigmaTildeS", "2.01,50", "mismatch"),
])
def test_hinf_threshold(tmp_path, condition, bracket, status):
    code, data, _ = run_cli(tmp_path, "hinf-threshold", "--input", "paper-sec8-plant",
                            "--condition", condition, "--bracket", bracket)
    assert code == 0
    assert data["status"] == status
    if status == "match":
        assert abs(data["threshold"] - 2.0) < 1e-6 and data["paper_value"] == 2.0


def test_repro_paper_deterministic(tmp_path):
    a = run_cli(tmp_path, "repro-paper", name="a.json")[2].read_bytes()
    b = run_cli(tmp_path, "repro-paper", name="b.json")[2].read_bytes()
    assert a == b
    data = json.loads(a)
    assert {r["criterion"] for r in data["records"]} >= {3, 4, 5, 6, 7, 8}
    assert "s_vs_s_inverse_consistency" in {r["name"] for r in data["records"]}


def test_console_entry_point(tmp_path):
    out = tmp_path / "t.json"
    proc = subprocess.run(
        [sys.executable, "-m", "stpgame.cli", "hinf-threshold", "--input", "paper-sec8-plant", "--output", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["status"] == "match"
