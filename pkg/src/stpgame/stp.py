"""Semi-tensor product algebra.

Dense operands are plain 2-D numpy arrays.  Logical data (delta vectors and
logical matrices) is kept in compact index form so that products among
logical operands are exact integer index arithmetic.

Indices in :class:`DeltaVector` and :class:`LogicalMatrix` are 1-based, as in
the usual ``delta_n[i_1 ... i_q]`` notation.  Boolean values are encoded as
``True -> delta_2^1`` and ``False -> delta_2^2``.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from ._linalg import as_matrix
from .errors import DimensionError, SizeCapExceeded

DEFAULT_SIZE_CAP = 2**24
SIZE_CAP_ENV = "TOOL_SIZE_CAP"


def get_size_cap() -> int:
    """Current cap on materialized entries; ``TOOL_SIZE_CAP`` overrides the default."""
    raw = os.environ.get(SIZE_CAP_ENV)
    if raw is None:
        return DEFAULT_SIZE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{SIZE_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise ValueError(f"{SIZE_CAP_ENV} must be positive, got {cap}")
    return cap


def _check_cap(entries: int, what: str, size_cap: int | None) -> None:
    cap = get_size_cap() if size_cap is None else size_cap
    if entries > cap:
        raise SizeCapExceeded(f"{what} needs {entries} entries, cap is {cap}")


@dataclass(frozen=True)
class DeltaVector:
    """The ``index``-th column of the ``dim`` x ``dim`` identity."""

    dim: int
    index: int

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"delta dimension must be positive, got {self.dim}")
        if not 1 <= self.index <= self.dim:
            raise DimensionError(f"delta index {self.index} out of range 1..{self.dim}")

    @property
    def shape(self):
        return (self.dim, 1)

    def dense(self) -> np.ndarray:
        v = np.zeros((self.dim, 1))
        v[self.index - 1, 0] = 1.0
        return v

    def as_logical(self) -> "LogicalMatrix":
        return LogicalMatrix(self.dim, (self.index,))


@dataclass(frozen=True)
class LogicalMatrix:
    """Matrix whose every column is a delta vector, stored as ``delta_rows[col_indices]``."""

    rows: int
    col_indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "col_indices", tuple(int(i) for i in self.col_indices))
        if self.rows < 1:
            raise DimensionError(f"logical matrix needs at least one row, got {self.rows}")
        if not self.col_indices:
            raise DimensionError("logical matrix needs at least one column")
        bad = [i for i in self.col_indices if not 1 <= i <= self.rows]
        if bad:
            raise DimensionError(f"column indices {bad} out of range 1..{self.rows}")

    @property
    def cols(self) -> int:
        return len(self.col_indices)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def dense(self) -> np.ndarray:
        m = np.zeros(self.shape)
        m[np.asarray(self.col_indices) - 1, np.arange(self.cols)] = 1.0
        return m

    def column(self, j: int) -> DeltaVector:
        """1-based column accessor."""
        return DeltaVector(self.rows, self.col_indices[j - 1])


Logical = Union[DeltaVector, LogicalMatrix]
Operand = Union[np.ndarray, DeltaVector, LogicalMatrix]


def delta(n: int, i: int) -> DeltaVector:
    return DeltaVector(n, i)


def logical_matrix(m: int, indices: Sequence[int]) -> LogicalMatrix:
    return LogicalMatrix(m, tuple(indices))


def ones(k: int) -> np.ndarray:
    """All-ones column of length ``k``."""
    if k < 1:
        raise DimensionError(f"length must be positive, got {k}")
    return np.ones((k, 1))


def identity(n: int) -> LogicalMatrix:
    return LogicalMatrix(n, tuple(range(1, n + 1)))


def densify(x: Operand) -> np.ndarray:
    if isinstance(x, (DeltaVector, LogicalMatrix)):
        return x.dense()
    return as_matrix(x)


def to_logical(m, *, atol: float = 0.0) -> LogicalMatrix:
    """Compact a dense 0/1 matrix with delta columns; raise if it is not logical."""
    if isinstance(m, LogicalMatrix):
        return m
    if isinstance(m, DeltaVector):
        return m.as_logical()
    m = as_matrix(m)
    rows, cols = m.shape
    idx = []
    for j in range(cols):
        col = m[:, j]
        hits = np.flatnonzero(np.abs(col - 1.0) <= atol)
        rest = np.delete(col, hits)
        if len(hits) != 1 or np.any(np.abs(rest) > atol):
            raise DimensionError(f"column {j + 1} is not a delta vector")
        idx.append(int(hits[0]) + 1)
    return LogicalMatrix(rows, tuple(idx))


def to_delta(v, *, atol: float = 0.0) -> DeltaVector:
    if isinstance(v, DeltaVector):
        return v
    lm = to_logical(v, atol=atol)
    if lm.cols != 1:
        raise DimensionError(f"expected a column, got shape {lm.shape}")
    return DeltaVector(lm.rows, lm.col_indices[0])


def _shape(x: Operand):
    if isinstance(x, (DeltaVector, LogicalMatrix)):
        return x.shape
    return np.shape(x)


def _is_logical(x) -> bool:
    return isinstance(x, (DeltaVector, LogicalMatrix))


def _as_lm(x: Logical) -> LogicalMatrix:
    return x.as_logical() if isinstance(x, DeltaVector) else x


def _wrap_logical(rows: int, idx) -> Logical:
    idx = tuple(int(i) for i in idx)
    if len(idx) == 1:
        return DeltaVector(rows, idx[0])
    return LogicalMatrix(rows, idx)


def stp_dims(a_rows: int, a_cols: int, b_rows: int, b_cols: int) -> tuple[int, int]:
    """Shape of ``A ⋉ B`` for ``A`` of shape (a_rows, a_cols) and ``B`` of (b_rows, b_cols)."""
    for name, v in (("a_rows", a_rows), ("a_cols", a_cols), ("b_rows", b_rows), ("b_cols", b_cols)):
        if v < 1:
            raise DimensionError(f"{name} must be positive, got {v}")
    t = math.lcm(a_cols, b_rows)
    return a_rows * t // a_cols, b_cols * t // b_rows


def stp_chain_dims(shapes: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """Fold :func:`stp_dims` left to right over a list of shapes."""
    if not shapes:
        raise DimensionError("empty chain")
    rows, cols = shapes[0]
    for r, c in shapes[1:]:
        rows, cols = stp_dims(rows, cols, r, c)
    return rows, cols


def kron(a: Operand, b: Operand, *, size_cap: int | None = None) -> Operand:
    """Kronecker product; logical operands give a logical result."""
    if _is_logical(a) and _is_logical(b):
        la, lb = _as_lm(a), _as_lm(b)
        _check_cap(la.cols * lb.cols, "kron", size_cap)
        idx = [(i - 1) * lb.rows + j for i in la.col_indices for j in lb.col_indices]
        return _wrap_logical(la.rows * lb.rows, idx)
    da, db = densify(a), densify(b)
    _check_cap(da.size * db.size, "kron", size_cap)
    return np.kron(da, db)


def stp_reference(a, b) -> np.ndarray:
    """Literal ``(A ⊗ I_{t/n})(B ⊗ I_{t/p})``; slow, used as an oracle."""
    a, b = densify(a), densify(b)
    n, p = a.shape[1], b.shape[0]
    t = math.lcm(n, p)
    return np.kron(a, np.eye(t // n)) @ np.kron(b, np.eye(t // p))


def stp(a: Operand, b: Operand, *, size_cap: int | None = None) -> Operand:
    """Semi-tensor product ``A ⋉ B``.

    Reduces to the ordinary product when ``cols(A) == rows(B)``.  If both
    operands are logical the result is logical (a :class:`DeltaVector` when it
    has one column) and is computed by index arithmetic.  If exactly one is
    logical, its Kronecker factor is never built.

    Raises
    ------
    SizeCapExceeded
        If the result (or the dense Kronecker factor it needs) has more
        entries than the cap.
    """
    (m, n), (p, q) = _shape(a), _shape(b)
    rows, cols = stp_dims(m, n, p, q)
    t = math.lcm(n, p)
    al, be = t // n, t // p

    if _is_logical(a) and _is_logical(b):
        _check_cap(cols, "stp", size_cap)
        ia = np.asarray(_as_lm(a).col_indices) - 1
        ib = np.asarray(_as_lm(b).col_indices) - 1
        c = np.arange(cols)
        r0 = ib[c // be] * be + c % be
        out = ia[r0 // al] * al + r0 % al
        return _wrap_logical(rows, out + 1)

    _check_cap(rows * cols, "stp", size_cap)

    if _is_logical(a):
        ia = np.asarray(_as_lm(a).col_indices) - 1
        bd = densify(b)
        _check_cap(t * cols, "stp factor", size_cap)
        bk = np.kron(bd, np.eye(be)) if be > 1 else bd
        r0 = np.arange(t)
        target = ia[r0 // al] * al + r0 % al
        out = np.zeros((rows, cols))
        np.add.at(out, target, bk)
        return out

    if _is_logical(b):
        ib = np.asarray(_as_lm(b).col_indices) - 1
        ad = densify(a)
        _check_cap(rows * t, "stp factor", size_cap)
        ak = np.kron(ad, np.eye(al)) if al > 1 else ad
        c = np.arange(cols)
        return ak[:, ib[c // be] * be + c % be]

    ad, bd = densify(a), densify(b)
    if n == p:
        return ad @ bd
    _check_cap(t * cols, "stp factor", size_cap)
    bk = np.kron(bd, np.eye(be)) if be > 1 else bd
    # (A ⊗ I_al) acts on row blocks of size al without being formed
    out = np.einsum("ij,jrc->irc", ad, bk.reshape(n, al, cols))
    return out.reshape(rows, cols)


def stp_chain(*operands: Operand, size_cap: int | None = None) -> Operand:
    """Left fold of :func:`stp`; associativity makes the bracketing irrelevant."""
    if not operands:
        raise DimensionError("empty chain")
    acc = operands[0]
    for op in operands[1:]:
        acc = stp(acc, op, size_cap=size_cap)
    return acc


def transpose(x: Operand) -> np.ndarray:
    return densify(x).T


def vector_matrix_exchange(x, m) -> np.ndarray:
    """Return ``X ⋉ M`` for a column vector ``X``.

    Equal to ``(I_t ⊗ M) ⋉ X``; see :func:`exchange_rhs` for that side.
    """
    if _shape(x)[1] != 1:
        raise DimensionError(f"X must be a column vector, got shape {_shape(x)}")
    return densify(stp(x, m))


def exchange_rhs(x, m) -> np.ndarray:
    if _shape(x)[1] != 1:
        raise DimensionError(f"X must be a column vector, got shape {_shape(x)}")
    t = _shape(x)[0]
    return densify(stp(np.kron(np.eye(t), densify(m)), x))


def encode_bool(b: bool) -> DeltaVector:
    return DeltaVector(2, 1 if b else 2)


def decode_bool(v) -> bool:
    v = to_delta(v)
    if v.dim != 2:
        raise DimensionError(f"Boolean decoding needs dimension 2, got {v.dim}")
    return v.index == 1


def canonical_inputs(arity: int):
    """Input tuples in column order of the algebraic form (all-true first)."""
    return itertools.product((True, False), repeat=arity)


def input_index(bits: Sequence[bool]) -> int:
    """1-based column index of ``x_1 ⋉ ... ⋉ x_n`` for the given Boolean inputs."""
    idx = 0
    for b in bits:
        idx = 2 * idx + (0 if b else 1)
    return idx + 1


@dataclass(frozen=True)
class TruthTable:
    """Boolean function of ``arity`` inputs; ``outputs[k]`` is the value on the
    k-th tuple of :func:`canonical_inputs`."""

    arity: int
    outputs: tuple

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(bool(o) for o in self.outputs))
        if self.arity < 1:
            raise DimensionError(f"arity must be positive, got {self.arity}")
        if len(self.outputs) != 2**self.arity:
            raise DimensionError(
                f"truth table of arity {self.arity} needs {2**self.arity} outputs, got {len(self.outputs)}"
            )

    @classmethod
    def from_function(cls, f: Callable[..., bool], arity: int) -> "TruthTable":
        return cls(arity, tuple(bool(f(*bits)) for bits in canonical_inputs(arity)))

    def __call__(self, *bits: bool) -> bool:
        if len(bits) != self.arity:
            raise DimensionError(f"expected {self.arity} inputs, got {len(bits)}")
        return self.outputs[input_index(bits) - 1]


def structure_matrix(f: TruthTable) -> LogicalMatrix:
    return LogicalMatrix(2, tuple(1 if out else 2 for out in f.outputs))


def evaluate_algebraic_form(mf, bits: Sequence[bool]) -> bool:
    """Evaluate ``M_f ⋉ x_1 ⋉ ... ⋉ x_n`` on dense operands and decode the result."""
    y = densify(mf)
    for b in bits:
        y = stp(y, encode_bool(b).dense())
    return decode_bool(y)
