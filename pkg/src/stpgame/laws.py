"""Randomized checks of the algebraic laws of the semi-tensor product."""
from __future__ import annotations

import numpy as np

from .stp import exchange_rhs, stp, vector_matrix_exchange


def _rel(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


def law_suite(rng: np.random.Generator, draws: int = 1000, max_dim: int = 8) -> dict:
    """Worst relative deviation of each law over ``draws`` random draws.

    Dimensions are drawn independently in ``1..max_dim`` so most products
    have mismatched inner dimensions.
    """
    def dim():
        return int(rng.integers(1, max_dim + 1))

    def mat(r, c):
        return rng.normal(size=(r, c))

    worst = {k: 0.0 for k in ("associativity", "distributivity", "transpose", "inverse",
                              "conventional", "exchange")}
    for _ in range(draws):
        A, B, C = mat(dim(), dim()), mat(dim(), dim()), mat(dim(), dim())
        worst["associativity"] = max(worst["associativity"], _rel(stp(A, stp(B, C)), stp(stp(A, B), C)))

        B2 = mat(*B.shape)
        A2 = mat(*A.shape)
        left = _rel(stp(A, B + B2), stp(A, B) + stp(A, B2))
        right = _rel(stp(A + A2, B), stp(A, B) + stp(A2, B))
        worst["distributivity"] = max(worst["distributivity"], left, right)

        worst["transpose"] = max(worst["transpose"], _rel(stp(A, B).T, stp(B.T, A.T)))

        k1, k2 = dim(), dim()
        Ai = mat(k1, k1) + k1 * np.eye(k1)
        Bi = mat(k2, k2) + k2 * np.eye(k2)
        lhs = np.linalg.inv(stp(Ai, Bi))
        rhs = stp(np.linalg.inv(Bi), np.linalg.inv(Ai))
        worst["inverse"] = max(worst["inverse"], _rel(lhs, rhs))

        Cc = mat(A.shape[1], dim())
        worst["conventional"] = max(worst["conventional"], float(np.max(np.abs(stp(A, Cc) - A @ Cc))))

        X = mat(dim(), 1)
        M = mat(dim(), dim())
        worst["exchange"] = max(worst["exchange"], _rel(vector_matrix_exchange(X, M), exchange_rhs(X, M)))
    return worst


LAW_TOLERANCES = {
    "associativity": 1e-10,
    "distributivity": 1e-10,
    "transpose": 1e-12,
    "inverse": 1e-8,
    "conventional": 0.0,
    "exchange": 1e-12,
}
