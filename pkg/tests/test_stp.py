import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import kron_stp
from stpgame.errors import DimensionError, SizeCapExceeded
from stpgame.stp import (
    DeltaVector,
    LogicalMatrix,
    TruthTable,
    decode_bool,
    delta,
    densify,
    encode_bool,
    evaluate_algebraic_form,
    exchange_rhs,
    identity,
    kron,
    logical_matrix,
    ones,
    stp,
    stp_chain,
    stp_chain_dims,
    stp_dims,
    stp_reference,
    structure_matrix,
    to_logical,
    vector_matrix_exchange,
)

dims = st.integers(1, 6)
floats = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def matrices(draw, rows=None, cols=None):
    r = rows if rows is not None else draw(dims)
    c = cols if cols is not None else draw(dims)
    return draw(arrays(np.float64, (r, c), elements=floats))


@st.composite
def logicals(draw):
    rows = draw(dims)
    cols = draw(dims)
    idx = draw(st.lists(st.integers(1, rows), min_size=cols, max_size=cols))
    return LogicalMatrix(rows, tuple(idx))


def rel_close(a, b, tol):
    a, b = densify(a), densify(b)
    assert a.shape == b.shape
    scale = max(1.0, np.abs(b).max())
    assert np.abs(a - b).max() <= tol * scale


# -- basic examples -----------------------------------------------------------


def test_identity_product():
    assert np.array_equal(stp(np.eye(2), np.eye(2)), np.eye(2))


def test_delta_product_index():
    out = stp(delta(2, 1), delta(2, 1))
    assert out == delta(4, 1)


def test_mismatched_dims_example():
    out = stp(np.ones((2, 4)), np.ones((2, 3)))
    assert out.shape == (2, 6)


@pytest.mark.parametrize(
    "shapes, expected",
    [
        ((4, 1, 1, 8), (4, 8)),
        ((4, 8, 1, 4), (4, 32)),
        ((4, 8, 8, 1), (4, 1)),
    ],
)
def test_dimension_chase(shapes, expected):
    # (2^m,1)x(1,2^n), (2^m,2^n)x(1,2^m), (2^m,2^n)x(2^n,1) with m=2, n=3
    assert stp_dims(*shapes) == expected


def test_delta_and_logical_constructors():
    assert np.array_equal(delta(2, 1).dense(), [[1], [0]])
    assert np.array_equal(delta(2, 2).dense(), [[0], [1]])
    assert np.array_equal(logical_matrix(2, [1, 2, 2, 2]).dense(), [[1, 0, 0, 0], [0, 1, 1, 1]])
    with pytest.raises(DimensionError):
        delta(2, 3)
    with pytest.raises(DimensionError):
        logical_matrix(2, [0, 1])


def test_ones_and_identity():
    assert np.array_equal(ones(3), np.ones((3, 1)))
    assert np.array_equal(identity(3).dense(), np.eye(3))


def test_kron_examples():
    B = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(kron(np.eye(1), B), B)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    K = kron(np.eye(2), swap)
    assert np.array_equal(K[:2, :2], swap) and np.array_equal(K[2:, 2:], swap)
    assert not K[:2, 2:].any() and not K[2:, :2].any()
    assert kron(delta(2, 1), delta(2, 2)) == delta(4, 2)


def test_exchange_examples():
    assert np.array_equal(vector_matrix_exchange(delta(2, 1), np.eye(2)), stp(kron(np.eye(2), np.eye(2)), delta(2, 1).dense()))
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(vector_matrix_exchange(delta(2, 2), swap), exchange_rhs(delta(2, 2), swap))
    with pytest.raises(DimensionError):
        vector_matrix_exchange(np.ones((2, 2)), swap)


def test_bool_encoding():
    assert encode_bool(True) == delta(2, 1)
    assert encode_bool(False) == delta(2, 2)
    for b in (True, False):
        assert decode_bool(encode_bool(b)) is b
    with pytest.raises(DimensionError):
        decode_bool(delta(3, 1))


def test_structure_matrix_examples():
    AND = TruthTable.from_function(lambda a, b: a and b, 2)
    NOT = TruthTable.from_function(lambda a: not a, 1)
    ID = TruthTable.from_function(lambda a: a, 1)
    assert structure_matrix(AND) == logical_matrix(2, [1, 2, 2, 2])
    assert structure_matrix(NOT) == logical_matrix(2, [2, 1])
    assert structure_matrix(ID) == logical_matrix(2, [1, 2])


def test_size_cap(monkeypatch):
    monkeypatch.setenv("TOOL_SIZE_CAP", "100")
    with pytest.raises(SizeCapExceeded):
        stp(np.ones((10, 3)), np.ones((2, 10)))
    with pytest.raises(MemoryError):
        kron(np.ones((11, 1)), np.ones((10, 1)))


def test_logical_round_trip():
    lm = logical_matrix(3, [3, 1, 2, 2])
    assert to_logical(lm.dense()) == lm
    with pytest.raises(DimensionError):
        to_logical(np.array([[0.5], [0.5]]))


# -- properties -----------------------------------------------------------------


@given(matrices(), matrices())
def test_matches_kronecker_definition(a, b):
    out = stp(a, b)
    assert out.shape == stp_dims(*a.shape, *b.shape)
    rel_close(out, kron_stp(a, b), 1e-12)


@given(st.data())
def test_logical_paths_match_dense(data):
    a = data.draw(st.one_of(logicals(), matrices()))
    b = data.draw(st.one_of(logicals(), matrices()))
    rel_close(stp(a, b), kron_stp(densify(a), densify(b)), 1e-12)


@given(matrices(), matrices(), matrices())
def test_associativity(a, b, c):
    rel_close(stp(a, stp(b, c)), stp(stp(a, b), c), 1e-10)


@given(st.data())
def test_distributivity(data):
    a = data.draw(matrices())
    b = data.draw(matrices())
    b2 = data.draw(matrices(*b.shape))
    a2 = data.draw(matrices(*a.shape))
    rel_close(stp(a, b + b2), stp(a, b) + stp(a, b2), 1e-10)
    rel_close(stp(a + a2, b), stp(a, b) + stp(a2, b), 1e-10)


@given(matrices(), matrices())
def test_transpose(a, b):
    lhs, rhs = stp(a, b).T, stp(b.T, a.T)
    assert lhs.shape == rhs.shape
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31))
def test_inverse(k1, k2, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(k1, k1)) + k1 * np.eye(k1)
    B = rng.normal(size=(k2, k2)) + k2 * np.eye(k2)
    lhs = np.linalg.inv(stp(A, B))
    rhs = stp(np.linalg.inv(B), np.linalg.inv(A))
    assert np.abs(lhs - rhs).max() <= 1e-8


@given(st.data())
def test_conventional_reduction_exact(data):
    a = data.draw(matrices())
    b = data.draw(matrices(rows=a.shape[1]))
    assert np.array_equal(stp(a, b), a @ b)


@given(matrices(cols=1), matrices())
def test_exchange_identity(x, m):
    rel_close(vector_matrix_exchange(x, m), exchange_rhs(x, m), 1e-12)


def test_exchange_random_column(rng):
    x = rng.normal(size=(3, 1))
    M = rng.normal(size=(2, 2))
    rel_close(vector_matrix_exchange(x, M), stp(np.kron(np.eye(3), M), x), 1e-12)


@given(st.integers(1, 9), st.integers(1, 9), st.data())
def test_delta_closure(p, q, data):
    i = data.draw(st.integers(1, p))
    j = data.draw(st.integers(1, q))
    out = stp(delta(p, i), delta(q, j))
    assert isinstance(out, DeltaVector)
    assert out == delta(p * q, (i - 1) * q + j)


@given(st.lists(st.tuples(dims, dims), min_size=2, max_size=5), st.integers(0, 2**31))
def test_chain_dims_match_materialized(shapes, seed):
    rng = np.random.default_rng(seed)
    ops = [rng.normal(size=s) for s in shapes]
    assert stp_chain(*ops).shape == stp_chain_dims(shapes)


@given(st.integers(1, 4), st.data())
def test_structure_matrix_algebraic_form(arity, data):
    outs = data.draw(st.lists(st.booleans(), min_size=2**arity, max_size=2**arity))
    tt = TruthTable(arity, tuple(outs))
    mf = structure_matrix(tt)
    for bits in itertools.product((True, False), repeat=arity):
        chain = stp_chain(mf, *[encode_bool(b) for b in bits])
        assert decode_bool(chain) == tt(*bits)
        assert evaluate_algebraic_form(mf, bits) == tt(*bits)


def test_reference_is_kron_definition(rng):
    a, b = rng.normal(size=(3, 4)), rng.normal(size=(6, 2))
    assert np.allclose(stp_reference(a, b), kron_stp(a, b), rtol=0, atol=1e-14)
    assert stp_reference(a, b).shape == (9, 4)
