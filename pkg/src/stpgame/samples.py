"""Seeded random instance generators used by the report and the scripts."""
from __future__ import annotations

import numpy as np

from .games import FiniteDpProblem, LqGame
from .hinf import HinfPlant
from .lqr import LqrProblem


def spd(rng: np.random.Generator, k: int, floor: float = 0.5) -> np.ndarray:
    M = rng.normal(size=(k, k))
    return M @ M.T + floor * np.eye(k)


def psd(rng: np.random.Generator, k: int) -> np.ndarray:
    M = rng.normal(size=(k, max(1, k - 1)))
    return M @ M.T


def stable(rng: np.random.Generator, n: int, radius: float = 0.8) -> np.ndarray:
    A = rng.normal(size=(n, n))
    return A * (radius / max(np.max(np.abs(np.linalg.eigvals(A))), 1e-12))


def random_lqr(rng: np.random.Generator, n: int, m: int) -> LqrProblem:
    """Stable ``A`` and a control weight large enough that ``B'PB - R`` tends
    to stay negative definite along the iteration."""
    A = stable(rng, n, rng.uniform(0.2, 0.9))
    B = rng.normal(size=(n, m))
    Q = spd(rng, n, 0.1)
    R = spd(rng, m, 1.0) + (1.0 + 10.0 * np.linalg.norm(B) ** 2 * np.linalg.norm(Q)) * np.eye(m)
    return LqrProblem(A, B, Q, R)


def random_game(rng: np.random.Generator, N: int, T: int, n: int, m: int = 1) -> LqGame:
    A = [rng.normal(size=(n, n)) for _ in range(T)]
    B = [[rng.normal(size=(n, m)) for _ in range(T)] for _ in range(N)]
    Q = [[psd(rng, n) + 0.1 * np.eye(n) for _ in range(T)] for _ in range(N)]
    R = [[spd(rng, m) for _ in range(T)] for _ in range(N)]
    return LqGame(A, B, Q, R, rng.normal(size=n))


def random_dp(rng: np.random.Generator, n_states: int, n_controls: int, T: int) -> FiniteDpProblem:
    """Random transition table with integer stage costs, so value comparisons are exact."""
    nxt = rng.integers(0, n_states, size=(T, n_states, n_controls))
    cost = rng.integers(0, 20, size=(T, n_states, n_controls, n_states))
    states = tuple(range(n_states))
    controls = tuple(range(n_controls))
    return FiniteDpProblem(
        T, states, controls,
        lambda t, x, u: int(nxt[t - 1, x, u]),
        lambda t, xn, u, x: int(cost[t - 1, x, u, xn]),
    )


def random_plant(rng: np.random.Generator, n: int) -> HinfPlant:
    """Square-input plant with well-conditioned ``G`` and ``E``."""
    def wellcond(k):
        Q, _ = np.linalg.qr(rng.normal(size=(k, k)))
        return Q @ np.diag(rng.uniform(0.5, 2.0, size=k))

    return HinfPlant(
        A=rng.normal(size=(n, n)) * 0.5,
        B=rng.normal(size=(n, n)),
        C=rng.normal(size=(n, n)),
        D=rng.normal(size=(n, n)),
        E=wellcond(n),
        G=wellcond(n),
        H=rng.normal(size=(n, n)),
    )
