"""JSON readers and writers for every toolkit object.

Two writers are provided.  :func:`dumps_exact` keeps full float precision
(``repr`` round trip) and is used for data files.  :func:`dumps_report`
writes every float in 12-significant-digit scientific form so that reports
are byte-stable; non-finite floats become ``null``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .boolnet import BooleanNetwork, CycleReport
from .errors import SchemaError, StpGameError
from .games import LqGame, NashSolution
from .hinf import GammaReport, HinfPlant
from .lqr import LqrProblem, LqrSolution
from .stp import DeltaVector, LogicalMatrix, TruthTable

# ---------------------------------------------------------------------------
# writers


def _plain(obj):
    """Convert numpy scalars and arrays, tuples and dataclass-free containers to JSON types."""
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".11e")


def _render(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_render(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_render(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _render(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(obj, indent: int = 2) -> str:
    return _render(_plain(obj), indent, 0) + "\n"


def dumps_exact(obj, indent: int = 2) -> str:
    return json.dumps(_plain(obj), indent=indent, allow_nan=False) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def rows_to_csv(header, rows) -> str:
    """CSV with floats in report formatting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_cell(v) for v in row])
    return buf.getvalue()


def _fmt_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        s = _fmt_float(float(v))
        return "" if s == "null" else s
    return v


# ---------------------------------------------------------------------------
# matrices


def matrix_to_json(m) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": [float(v) for v in m.ravel()]}


def matrix_from_json(obj, field: str = "matrix") -> np.ndarray:
    """Accept ``{rows, cols, entries}`` (row-major), a nested list or a flat
    list (read as a column) or a bare number."""
    if isinstance(obj, Mapping):
        try:
            r, c, e = int(obj["rows"]), int(obj["cols"]), obj["entries"]
        except KeyError as exc:
            raise SchemaError(field, f"missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError):
            raise SchemaError(field, "rows and cols must be integers") from None
        if r < 1 or c < 1:
            raise SchemaError(field, "rows and cols must be positive")
        if not isinstance(e, list) or len(e) != r * c:
            raise SchemaError(field, f"entries must be a list of {r * c} numbers")
        arr = _numbers(e, field)
        return arr.reshape(r, c)
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return _numbers([obj], field).reshape(1, 1)
    if isinstance(obj, list) and obj:
        if all(isinstance(v, list) for v in obj):
            widths = {len(v) for v in obj}
            if len(widths) != 1 or 0 in widths:
                raise SchemaError(field, "ragged or empty rows")
            return _numbers([x for row in obj for x in row], field).reshape(len(obj), widths.pop())
        return _numbers(obj, field).reshape(-1, 1)
    raise SchemaError(field, "expected a matrix object, nested list or number")


def _numbers(values, field) -> np.ndarray:
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(field, f"non-numeric entry {v!r}")
    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise SchemaError(field, "non-finite entry")
    return arr


def logical_to_json(m) -> dict:
    if isinstance(m, DeltaVector):
        m = m.as_logical()
    return {"rows": m.rows, "col_indices": list(m.col_indices)}


def logical_from_json(obj, field: str = "logical") -> LogicalMatrix:
    try:
        rows, idx = int(obj["rows"]), obj["col_indices"]
        return LogicalMatrix(rows, tuple(int(i) for i in idx))
    except (KeyError, TypeError) as exc:
        raise SchemaError(field, f"expected {{rows, col_indices}}: {exc}") from None
    except StpGameError as exc:
        raise SchemaError(field, str(exc)) from None


def operand_from_json(obj, field: str):
    """A logical matrix if the object has ``col_indices``, else a dense matrix."""
    if isinstance(obj, Mapping) and "col_indices" in obj:
        return logical_from_json(obj, field)
    return matrix_from_json(obj, field)


def _require(obj, key, field_prefix=""):
    if not isinstance(obj, Mapping):
        raise SchemaError(field_prefix or "input", "expected a JSON object")
    if key not in obj:
        raise SchemaError(f"{field_prefix}{key}", "missing")
    return obj[key]


# ---------------------------------------------------------------------------
# Boolean networks


def network_to_json(net: BooleanNetwork) -> dict:
    return {
        "n": net.n,
        "m": net.m,
        "nodes": [
            {"name": name, "truth_table": [int(b) for b in tt.outputs]}
            for name, tt in zip(net.names, net.node_updates)
        ],
    }


def network_from_json(obj) -> BooleanNetwork:
    n, m = _require(obj, "n"), _require(obj, "m")
    if not isinstance(n, int) or not isinstance(m, int) or isinstance(n, bool) or isinstance(m, bool):
        raise SchemaError("n", "n and m must be integers")
    nodes = _require(obj, "nodes")
    if not isinstance(nodes, list):
        raise SchemaError("nodes", "expected a list")
    tables, names = [], []
    for k, node in enumerate(nodes):
        bits = _require(node, "truth_table", f"nodes[{k}].")
        if not isinstance(bits, list) or any(b not in (0, 1) or isinstance(b, float) for b in bits):
            raise SchemaError(f"nodes[{k}].truth_table", "expected a list of 0/1")
        try:
            tables.append(TruthTable(m + n, tuple(bool(b) for b in bits)))
        except StpGameError as exc:
            raise SchemaError(f"nodes[{k}].truth_table", str(exc)) from None
        names.append(str(node.get("name", f"x{k + 1}")))
    try:
        return BooleanNetwork.from_tables(tables, n, m, names)
    except StpGameError as exc:
        raise SchemaError("nodes", str(exc)) from None


def cycle_to_json(rep: CycleReport) -> dict:
    return {
        "transient_length": rep.transient_length,
        "cycle_length": rep.cycle_length,
        "is_fixed_point": rep.is_fixed_point,
        "cycle_states": [s.index for s in rep.cycle_states],
    }


# ---------------------------------------------------------------------------
# LQR


def lqr_problem_to_json(prob: LqrProblem) -> dict:
    return {k: matrix_to_json(getattr(prob, k)) for k in "ABQR"}


def lqr_problem_from_json(obj) -> LqrProblem:
    mats = {k: matrix_from_json(_require(obj, k), k) for k in "ABQR"}
    try:
        return LqrProblem(**mats)
    except StpGameError as exc:
        raise SchemaError("problem", str(exc)) from None


def lqr_solution_to_json(sol: LqrSolution) -> dict:
    return {
        "P": matrix_to_json(sol.P),
        "K": matrix_to_json(sol.K),
        "bellman_residual_norm": sol.bellman_residual_norm,
        "iterations": sol.iterations,
    }


# ---------------------------------------------------------------------------
# LQ games


def game_to_json(game: LqGame) -> dict:
    return {
        "A": [matrix_to_json(a) for a in game.A],
        "B": [[matrix_to_json(b) for b in bi] for bi in game.B],
        "Q": [[matrix_to_json(q) for q in qi] for qi in game.Q],
        "R": [[matrix_to_json(r) for r in ri] for ri in game.R],
        "x1": [float(v) for v in np.ravel(game.x1)],
    }


def game_from_json(obj) -> LqGame:
    def mats(key):
        val = _require(obj, key)
        if not isinstance(val, list) or not val:
            raise SchemaError(key, "expected a nonempty list")
        return val

    A = [matrix_from_json(a, f"A[{t}]") for t, a in enumerate(mats("A"))]
    per_player = {}
    for key in "BQR":
        lists = mats(key)
        per_player[key] = [
            [matrix_from_json(v, f"{key}[{i}][{t}]") for t, v in enumerate(_as_list(li, f"{key}[{i}]"))]
            for i, li in enumerate(lists)
        ]
    x1 = matrix_from_json(_require(obj, "x1"), "x1")
    try:
        return LqGame(A, per_player["B"], per_player["Q"], per_player["R"], x1)
    except StpGameError as exc:
        raise SchemaError("game", str(exc)) from None


def _as_list(v, field):
    if not isinstance(v, list):
        raise SchemaError(field, "expected a list")
    return v


def _vec(v):
    return [float(a) for a in np.ravel(v)]


def nash_solution_to_json(sol: NashSolution) -> dict:
    def series(d, conv):
        return {str(t): conv(v) for t, v in sorted(d.items())}

    return {
        "trajectory": series(sol.x, _vec),
        "controls": [series(u, _vec) for u in sol.u],
        "S": [series(s, matrix_to_json) for s in sol.S],
        "s": [series(s, _vec) for s in sol.s],
        "P": [series(p, matrix_to_json) for p in sol.P],
        "K": series(sol.K, matrix_to_json),
        "costates": [series(p, _vec) for p in sol.costates],
    }


# ---------------------------------------------------------------------------
# H-infinity


def plant_to_json(plant: HinfPlant) -> dict:
    return {k: matrix_to_json(getattr(plant, k)) for k in "ABCDEGH"}


def plant_from_json(obj) -> HinfPlant:
    mats = {k: matrix_from_json(_require(obj, k), k) for k in "ABCDEGH"}
    try:
        return HinfPlant(**mats)
    except StpGameError as exc:
        raise SchemaError("plant", str(exc)) from None


GAMMA_CSV_HEADER = ("gamma", "rho_MS", "rho_SigmaTildeS", "rho_SigmaQ", "rho_SigmaSbar", "branch1", "branch2")


def gamma_report_to_json(rep: GammaReport) -> dict:
    return {
        "gamma": rep.gamma,
        "convention": rep.convention,
        "rho_MS": rep.rho_MS,
        "rho_SigmaTildeS": rep.rho_SigmaTildeS,
        "rho_SigmaQ": rep.rho_SigmaQ,
        "rho_SigmaSbar": rep.rho_SigmaSbar,
        "branch1": rep.branch1_feasible,
        "branch2": rep.branch2_feasible,
        "alternate_convention": dict(rep.alternate),
        "certificate": dict(rep.certificate),
    }


def gamma_reports_to_csv(reports) -> str:
    rows = [
        (r.gamma, r.rho_MS, r.rho_SigmaTildeS, r.rho_SigmaQ, r.rho_SigmaSbar, r.branch1_feasible, r.branch2_feasible)
        for r in reports
    ]
    return rows_to_csv(GAMMA_CSV_HEADER, rows)


def load_json(path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError("input", f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("input", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
