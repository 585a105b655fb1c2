"""Discrete-time LQR with the sign-flipped control weight.

The stage cost is ``x'Qx - u'Ru``, so the stationary control of the
Hamiltonian solves ``(B'PB - R) u = -B'PA x`` and is a maximizer in ``u``
whenever ``B'PB - R`` is negative definite.  Nothing here flips the sign
back to the textbook ``+u'Ru``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .errors import ConvergenceError, DimensionError

SYM_TOL = 1e-10


@dataclass(frozen=True)
class LqrProblem:
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        for name in "ABQR":
            object.__setattr__(self, name, la.frozen(getattr(self, name), name))
        n, m = self.B.shape
        if self.A.shape != (n, n):
            raise DimensionError(f"A must be {n}x{n}, got {self.A.shape}")
        if self.Q.shape != (n, n):
            raise DimensionError(f"Q must be {n}x{n}, got {self.Q.shape}")
        if self.R.shape != (m, m):
            raise DimensionError(f"R must be {m}x{m}, got {self.R.shape}")
        if la.max_abs(self.Q - self.Q.T) > SYM_TOL or np.linalg.eigvalsh(self.Q).min() < -1e-12:
            raise DimensionError("Q must be symmetric positive semidefinite")
        if la.max_abs(self.R - self.R.T) > SYM_TOL or np.linalg.eigvalsh(self.R).min() <= 0:
            raise DimensionError("R must be symmetric positive definite")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class LqrSolution:
    P: np.ndarray
    K: np.ndarray
    bellman_residual_norm: float
    iterations: int


def _col(x, n, name):
    v = la.as_matrix(x, name)
    if v.shape != (n, 1):
        raise DimensionError(f"{name} must have length {n}, got shape {v.shape}")
    return v


def value(P, x) -> float:
    """Quadratic value ``x'Px / 2``."""
    P = la.as_matrix(P, "P")
    x = _col(x, P.shape[0], "x")
    return float(0.5 * (x.T @ P @ x)[0, 0])


def _bracket(prob: LqrProblem, P, x, u):
    """Return ``(x'Px, x'Qx - u'Ru + x+'Px+)``."""
    P = la.as_matrix(P, "P")
    if P.shape != (prob.n, prob.n):
        raise DimensionError(f"P must be {prob.n}x{prob.n}, got {P.shape}")
    x = _col(x, prob.n, "x")
    u = _col(u, prob.m, "u")
    xn = prob.A @ x + prob.B @ u
    now = float((x.T @ P @ x)[0, 0])
    rhs = float((x.T @ prob.Q @ x - u.T @ prob.R @ u + xn.T @ P @ xn)[0, 0])
    return now, rhs


def bellman_residual(prob: LqrProblem, P, x, u) -> float:
    """``x'Px - (x'Qx - u'Ru + x+'Px+)`` with ``x+ = Ax + Bu``."""
    now, rhs = _bracket(prob, P, x, u)
    return now - rhs


def hamiltonian(prob: LqrProblem, P, x, u) -> float:
    now, rhs = _bracket(prob, P, x, u)
    return rhs - now


def optimal_gain(prob: LqrProblem, P, cond_max: float = la.COND_MAX) -> np.ndarray:
    """``K = -(B'PB - R)^{-1} B'PA`` so that ``u = Kx`` makes ``dH/du`` vanish."""
    P = la.as_matrix(P, "P")
    pivot = prob.B.T @ P @ prob.B - prob.R
    return -la.solve(pivot, prob.B.T @ P @ prob.A, "B'PB - R", cond_max)


def hamiltonian_gradient_fd(prob: LqrProblem, P, x, u, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of :func:`hamiltonian` in ``u``."""
    u = _col(u, prob.m, "u")
    g = np.zeros(prob.m)
    for k in range(prob.m):
        e = np.zeros((prob.m, 1))
        e[k, 0] = h
        g[k] = (hamiltonian(prob, P, x, u + e) - hamiltonian(prob, P, x, u - e)) / (2 * h)
    return g


def kernel_residual(prob: LqrProblem, P, K) -> np.ndarray:
    """Matrix ``P - (Q - K'RK + (A+BK)'P(A+BK))``; its quadratic form is the
    Bellman residual at ``u = Kx``."""
    Acl = prob.A + prob.B @ K
    return P - (prob.Q - K.T @ prob.R @ K + Acl.T @ P @ Acl)


def _inertia(m) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(0.5 * (m + m.T))
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def solve_kernel(prob: LqrProblem, tol: float = 1e-10, max_iter: int = 10_000,
                 cond_max: float = la.COND_MAX) -> LqrSolution:
    """Fixed-point iteration on the substituted Bellman equation, from ``P = Q``.

    Raises
    ------
    ConvergenceError
        No convergence within ``max_iter``, a non-finite iterate, or the pivot
        ``B'PB - R`` changing inertia between iterations (the stationary point
        switches from maximizer to saddle, so the iteration has no meaningful
        fixed point on that path).
    SingularFactorError
        The pivot became singular or ill-conditioned.
    """
    P = prob.Q.copy()
    inertia0 = _inertia(prob.B.T @ P @ prob.B - prob.R)
    for it in range(1, max_iter + 1):
        pivot = prob.B.T @ P @ prob.B - prob.R
        if _inertia(pivot) != inertia0:
            raise ConvergenceError(
                f"pivot B'PB - R changed inertia at iteration {it}: {inertia0} -> {_inertia(pivot)}"
            )
        K = optimal_gain(prob, P, cond_max)
        Acl = prob.A + prob.B @ K
        P_new = prob.Q - K.T @ prob.R @ K + Acl.T @ P @ Acl
        if not np.all(np.isfinite(P_new)):
            raise ConvergenceError(f"non-finite kernel at iteration {it}")
        diff = la.max_abs(P_new - P)
        P = P_new
        if diff < tol:
            K = optimal_gain(prob, P, cond_max)
            res = la.max_abs(kernel_residual(prob, P, K))
            return LqrSolution(P, K, res, it)
    raise ConvergenceError(f"no convergence after {max_iter} iterations (last step {diff:.3e})")


def check_kernel_symmetry(prob: LqrProblem, P_candidate, tol: float = SYM_TOL) -> bool:
    P = la.as_matrix(P_candidate, "P")
    if P.shape != (prob.n, prob.n):
        return False
    return la.max_abs(P - P.T) < tol

