"""Command-line front end.

Usage::

    stpgame <command> --input PATH --output PATH [--gamma-grid a,b,c]
                      [--convention max_modulus|max_real] [options]

``--input`` also accepts the name of a bundled example.  Exit status is 0
on success, 2 for unreadable or malformed input and 1 for any other toolkit
error.  Singular kernels or gains met inside hinf-solve and hinf-sweep are
recorded in the report rather than treated as failures.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import boolnet, games, hinf, lqr, serialize as ser
from . import _linalg as la
from .bundled import resolve_input
from .errors import SchemaError, SingularFactorError, StpGameError
from .laws import LAW_TOLERANCES, law_suite
from .repro import THRESHOLDS, run_repro
from .stp import DeltaVector, LogicalMatrix, delta, stp, stp_chain_dims, stp_reference, densify

COMMANDS = ("stp-check", "boolnet", "lqr", "nash", "hinf-solve", "hinf-sweep", "hinf-threshold", "repro-paper")
TOLERANCE_KEYS = ("threshold", "lqr", "cond_max")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    gamma_grid: tuple | None = None
    tolerance_overrides: dict = field(default_factory=dict)
    convention: str = "max_modulus"
    gamma: float | None = None
    condition: str = "MS"
    bracket: tuple = (1.01, 10.0)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SchemaError("command", f"unknown command {self.command!r}")
        if self.convention not in hinf.CONVENTIONS:
            raise SchemaError("convention", f"expected one of {hinf.CONVENTIONS}")
        if self.gamma_grid is not None:
            grid = tuple(float(g) for g in self.gamma_grid)
            if not grid:
                raise SchemaError("gamma_grid", "empty grid")
            if any(not (g > 0 and np.isfinite(g)) for g in grid):
                raise SchemaError("gamma_grid", "entries must be positive and finite")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise SchemaError("gamma_grid", "must be strictly increasing")
            object.__setattr__(self, "gamma_grid", grid)
        for k, v in self.tolerance_overrides.items():
            if k not in TOLERANCE_KEYS:
                raise SchemaError("tolerance_overrides", f"unknown key {k!r}; expected {TOLERANCE_KEYS}")
            if not v > 0:
                raise SchemaError("tolerance_overrides", f"{k} must be positive")
        if self.gamma is not None and not self.gamma > 0:
            raise SchemaError("gamma", "must be positive")
        lo, hi = self.bracket
        if not 0 < lo < hi:
            raise SchemaError("bracket", "need 0 < lo < hi")
        if self.condition not in hinf.CONDITIONS:
            raise SchemaError("condition", f"expected one of {hinf.CONDITIONS}")
        if self.command != "repro-paper" and self.input_path is None:
            raise SchemaError("input_path", f"{self.command} needs --input")
        if self.output_path is None:
            raise SchemaError("output_path", "missing --output")

    def tol(self, key, default):
        return self.tolerance_overrides.get(key, default)


# ---------------------------------------------------------------------------
# argument parsing


def _float_list(text: str, name: str) -> tuple:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise SchemaError(name, f"cannot parse {text!r} as comma-separated numbers") from None


def _tolerances(text: str | None) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep:
            raise SchemaError("tolerance_overrides", f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise SchemaError("tolerance_overrides", f"bad number in {item!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stpgame", description="STP, LQ game and H-infinity toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="input JSON path or bundled example name")
    p.add_argument("--output", required=True, help="output JSON path (CSV goes next to it)")
    p.add_argument("--gamma-grid", help="comma-separated, strictly increasing")
    p.add_argument("--convention", default="max_modulus", choices=hinf.CONVENTIONS)
    p.add_argument("--gamma", type=float)
    p.add_argument("--condition", default="MS", choices=hinf.CONDITIONS)
    p.add_argument("--bracket", default="1.01,10", help="lo,hi for hinf-threshold")
    p.add_argument("--tol", help="overrides, e.g. threshold=1e-8,lqr=1e-12,cond_max=1e10")
    return p


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    a = build_parser().parse_args(argv)
    grid = _float_list(a.gamma_grid, "gamma_grid") if a.gamma_grid is not None else None
    bracket = _float_list(a.bracket, "bracket")
    if len(bracket) != 2:
        raise SchemaError("bracket", "expected lo,hi")
    return RunConfig(a.command, a.input, a.output, grid, _tolerances(a.tol), a.convention,
                     a.gamma, a.condition, bracket)


# ---------------------------------------------------------------------------
# commands


def _load(cfg: RunConfig):
    return ser.load_json(resolve_input(cfg.input_path))


def _error_text(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _operand_json(x):
    if isinstance(x, (DeltaVector, LogicalMatrix)):
        return ser.logical_to_json(x)
    return ser.matrix_to_json(x)


def cmd_stp_check(cfg: RunConfig) -> dict:
    data = _load(cfg)
    out: dict[str, Any] = {}
    ops = data.get("operands") if isinstance(data, dict) else None
    if ops is not None:
        if not isinstance(ops, list) or not ops:
            raise SchemaError("operands", "expected a nonempty list")
        operands = [ser.operand_from_json(o, f"operands[{k}]") for k, o in enumerate(ops)]
        shapes = [tuple(o.shape) for o in operands]
        result, ref = operands[0], densify(operands[0])
        for o in operands[1:]:
            result = stp(result, o)
            ref = stp_reference(ref, densify(o))
        out["shapes"] = [list(s) for s in shapes]
        out["predicted_shape"] = list(stp_chain_dims(shapes))
        out["result_shape"] = list(result.shape)
        out["result"] = _operand_json(result)
        out["reference_max_abs_diff"] = la.max_abs(densify(result) - ref)
    draws = data.get("law_draws", 0) if isinstance(data, dict) else 0
    if draws:
        if not isinstance(draws, int) or draws < 0:
            raise SchemaError("law_draws", "expected a nonnegative integer")
        seed = data.get("seed", 0)
        worst = law_suite(np.random.default_rng(seed), draws, int(data.get("max_dim", 8)))
        out["laws"] = {k: {"worst": v, "tolerance": LAW_TOLERANCES[k], "ok": v <= LAW_TOLERANCES[k]}
                       for k, v in worst.items()}
    if not out:
        raise SchemaError("operands", "input needs operands and/or law_draws")
    return out


def cmd_boolnet(cfg: RunConfig) -> dict:
    data = _load(cfg)
    net = ser.network_from_json(data)
    out: dict[str, Any] = {"network": ser.network_to_json(net), "transition": ser.logical_to_json(net.transition)}
    x0 = data.get("x0")
    if x0 is not None:
        x0 = _index(x0, net.state_count, "x0")
    if "controls" in data and x0 is not None:
        ctl = [delta(net.control_count, _index(c, net.control_count, "controls")) for c in data["controls"]]
        traj = boolnet.simulate(net, ctl, delta(net.state_count, x0))
        out["trajectory"] = {"states": [s.index for s in traj.states], "controls": [c.index for c in traj.controls]}
    if "policy" in data:
        policy = data["policy"]
        if not isinstance(policy, list) or len(policy) != net.state_count:
            raise SchemaError("policy", f"expected {net.state_count} control indices")
        policy = [_index(c, net.control_count, "policy") for c in policy]
        out["attractors"] = {str(k): ser.cycle_to_json(r) for k, r in boolnet.attractors(net, policy).items()}
        if x0 is not None:
            out["cycle_from_x0"] = ser.cycle_to_json(boolnet.find_cycle(net, policy, delta(net.state_count, x0)))
    if "fixed_point_index" in data:
        i = data["fixed_point_index"]
        out["optimal_fixed_point"] = {
            "index": i,
            "verified": boolnet.verify_optimal_fixed_point(net.m, net.n, i),
            "delta_solutions": boolnet.fixed_point_candidates(net.m, net.n, i),
            "rhs_shape": list(boolnet.optimal_rhs_dims(net.m, net.n)),
        }
    return out


def _index(v, dim, name):
    if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= dim:
        raise SchemaError(name, f"expected an index in 1..{dim}, got {v!r}")
    return v


def cmd_lqr(cfg: RunConfig) -> dict:
    prob = ser.lqr_problem_from_json(_load(cfg))
    sol = lqr.solve_kernel(prob, tol=cfg.tol("lqr", 1e-10), cond_max=cfg.tol("cond_max", la.COND_MAX))
    return {
        "problem": ser.lqr_problem_to_json(prob),
        "solution": ser.lqr_solution_to_json(sol),
        "kernel_symmetric": lqr.check_kernel_symmetry(prob, sol.P),
    }


def cmd_nash(cfg: RunConfig) -> tuple[dict, str | None]:
    data = _load(cfg)
    game = ser.game_from_json(data)
    sol = games.lq_nash_solve(game, cond_max=cfg.tol("cond_max", la.COND_MAX))
    out = {
        "solution": ser.nash_solution_to_json(sol),
        "stagewise_residuals": games.stagewise_residuals(game, sol),
        "pontryagin": games.pontryagin_residuals(game, sol.x, sol.u, sol.costates).worst(),
        "costs": [],
    }
    for i in range(game.N):
        b = games.lq_nash_cost_breakdown(game, sol, i)
        out["costs"].append({"player": i, **b})
    csv_text = None
    grid = data.get("deviation_grid")
    if grid:
        grid = _float_list(",".join(str(g) for g in grid), "deviation_grid")
        rows = []
        for i in range(game.N):
            if game.m(i) == 1:
                rows += [(i, *r) for r in games.deviation_sweep(game, sol, i, grid)]
        out["min_deviation_change"] = min((r[3] for r in rows), default=None)
        csv_text = ser.rows_to_csv(("player", "stage", "delta", "cost_change"), rows)
    return out, csv_text


def _try(fn):
    try:
        return fn(), None
    except StpGameError as exc:
        return None, _error_text(exc)


def cmd_hinf_solve(cfg: RunConfig) -> dict:
    data = _load(cfg)
    plant = ser.plant_from_json(data)
    gamma = cfg.gamma if cfg.gamma is not None else data.get("gamma")
    if gamma is None:
        raise SchemaError("gamma", "pass --gamma or put gamma in the input")
    cm = cfg.tol("cond_max", la.COND_MAX)
    S_inv, Sig_inv = hinf.solve_inverse_form(plant, gamma, cm)
    rs, rz = hinf.inverse_form_residuals(plant, S_inv, Sig_inv, gamma, cm)
    out: dict[str, Any] = {
        "gamma": gamma,
        "S_inv": ser.matrix_to_json(S_inv),
        "Sigma_inv": ser.matrix_to_json(Sig_inv),
        "inverse_form_residual": {"S": la.max_abs(rs), "Sigma": la.max_abs(rz)},
    }
    S, err_s = _try(lambda: hinf.invert_kernel(S_inv, "S", cm))
    Sig, err_z = _try(lambda: hinf.invert_kernel(Sig_inv, "Sigma", cm))
    out["S"] = ser.matrix_to_json(S) if S is not None else None
    out["Sigma"] = ser.matrix_to_json(Sig) if Sig is not None else None
    out["errors"] = {}
    if err_s:
        out["errors"]["S"] = err_s
    if err_z:
        out["errors"]["Sigma"] = err_z
    if S is not None and Sig is not None:
        d = hinf.derive(plant, cm)
        res, err = _try(lambda: hinf.riccati_residuals(d, S, Sig, gamma, cm))
        if err:
            out["errors"]["riccati_form"] = err
        else:
            out["riccati_form_residual"] = {"S": la.max_abs(res[0]), "Sigma": la.max_abs(res[1])}
        rep, err = _try(lambda: hinf.gamma_report(plant, gamma, cfg.convention, cm))
        if err:
            out["errors"]["gamma_report"] = err
        else:
            out["gamma_report"] = ser.gamma_report_to_json(rep)
    for label, fn in (("closed_form_gain", hinf.hinf_gain), ("stationary_gain", hinf.stationary_gain)):
        K, err = _try(lambda fn=fn: fn(plant, cm))
        if err:
            out["errors"][label] = err
        else:
            out[label] = ser.matrix_to_json(K)
    return out


def cmd_hinf_sweep(cfg: RunConfig) -> tuple[dict, str]:
    data = _load(cfg)
    plant = ser.plant_from_json(data)
    grid = cfg.gamma_grid
    if grid is None:
        if "gamma_grid" not in data:
            raise SchemaError("gamma_grid", "pass --gamma-grid or put gamma_grid in the input")
        grid = RunConfig("hinf-sweep", "-", "-", tuple(data["gamma_grid"])).gamma_grid
    cm = cfg.tol("cond_max", la.COND_MAX)
    reports, rows = [], []
    for g in grid:
        rep, err = _try(lambda g=g: hinf.gamma_report(plant, g, cfg.convention, cm))
        if err:
            reports.append({"gamma": g, "error": err})
            rows.append((g, float("nan"), float("nan"), float("nan"), float("nan"), "", ""))
        else:
            reports.append(ser.gamma_report_to_json(rep))
            rows.append((g, rep.rho_MS, rep.rho_SigmaTildeS, rep.rho_SigmaQ, rep.rho_SigmaSbar,
                         rep.branch1_feasible, rep.branch2_feasible))
    return {"convention": cfg.convention, "reports": reports}, ser.rows_to_csv(ser.GAMMA_CSV_HEADER, rows)


def _is_swap_plant(plant) -> bool:
    ref = hinf.swap_plant()
    return all(np.array_equal(getattr(plant, k), getattr(ref, k)) for k in "ABCDEGH")


def cmd_hinf_threshold(cfg: RunConfig) -> dict:
    plant = ser.plant_from_json(_load(cfg))
    tol = cfg.tol("threshold", hinf.THRESHOLD_TOL)
    thr = hinf.gamma_threshold(plant, cfg.condition, cfg.bracket, cfg.convention, tol,
                               cfg.tol("cond_max", la.COND_MAX))
    out: dict[str, Any] = {
        "condition": cfg.condition,
        "bracket": list(cfg.bracket),
        "convention": cfg.convention,
        "tolerance": tol,
        "threshold": thr,
        "paper_value": None,
        "status": "not-applicable",
    }
    claims = {name: claimed for name, _, claimed, _, _ in THRESHOLDS}
    if _is_swap_plant(plant) and cfg.condition in claims:
        claimed = claims[cfg.condition]
        out["paper_value"] = claimed
        band = max(tol, 1e-6) if claimed == 2.0 else 5e-3
        out["status"] = "match" if abs(thr - claimed) <= band else "mismatch"
    return out


def run(cfg: RunConfig) -> int:
    """Execute one command and write its outputs; returns the exit status."""
    out_path = Path(cfg.output_path)
    json_path = out_path.with_suffix(".json") if out_path.suffix == ".csv" else out_path
    csv_path = json_path.with_suffix(".csv")
    csv_text = None
    if cfg.command == "stp-check":
        report = cmd_stp_check(cfg)
    elif cfg.command == "boolnet":
        report = cmd_boolnet(cfg)
    elif cfg.command == "lqr":
        report = cmd_lqr(cfg)
    elif cfg.command == "nash":
        report, csv_text = cmd_nash(cfg)
    elif cfg.command == "hinf-solve":
        report = cmd_hinf_solve(cfg)
    elif cfg.command == "hinf-sweep":
        report, csv_text = cmd_hinf_sweep(cfg)
    elif cfg.command == "hinf-threshold":
        report = cmd_hinf_threshold(cfg)
    else:
        report = run_repro().to_json()
    ser.write_text(json_path, ser.dumps_report({"command": cfg.command, **report}))
    if csv_text is not None:
        ser.write_text(csv_path, csv_text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
        return run(cfg)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StpGameError as exc:
        print(f"error: {_error_text(exc)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
