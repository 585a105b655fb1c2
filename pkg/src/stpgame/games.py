"""Min-max decisions, finite-horizon dynamic programming and LQ Nash games.

Time indexing follows the game: stages ``t = 1..T``, states ``x_1..x_{T+1}``.
Players are indexed from 0.  Inside :class:`LqGame` the per-stage lists are
0-based, so ``A[t-1]`` is ``A_t`` and ``Q[i][t-1]`` is the weight on
``x_{t+1}``; use the accessor methods rather than raw indexing.

In the stagewise Nash relations the coupling sum over other players'
controls excludes player ``i`` itself (the player's own term appears
separately in the dynamics).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping, Sequence

import numpy as np

from . import _linalg as la
from .errors import DimensionError, StpGameError

# ---------------------------------------------------------------------------
# min-max over finite sets


@dataclass(frozen=True)
class MinMaxProblem:
    decisions: tuple
    disturbances: tuple
    payoff: Callable[[Any, Any], Any]

    def __post_init__(self):
        object.__setattr__(self, "decisions", tuple(self.decisions))
        object.__setattr__(self, "disturbances", tuple(self.disturbances))
        if not self.decisions or not self.disturbances:
            raise DimensionError("decision and disturbance sets must be nonempty")


def _member(u, pool) -> bool:
    return any(np.array_equal(u, v) for v in pool)


def guaranteed_performance(prob: MinMaxProblem, u) -> float:
    """Worst case ``max_w J(u, w)`` over the disturbance set."""
    if not _member(u, prob.decisions):
        raise ValueError(f"{u!r} is not in the decision set")
    return max(float(prob.payoff(u, w)) for w in prob.disturbances)


def best_decision(prob: MinMaxProblem):
    """Return ``(u*, min_u max_w J)``; ties go to the earliest decision."""
    best_u, best_v = None, np.inf
    for u in prob.decisions:
        v = guaranteed_performance(prob, u)
        if v < best_v:
            best_u, best_v = u, v
    return best_u, best_v


def attenuation_feasible(prob: MinMaxProblem, gamma: float) -> bool:
    """True iff ``min_u max_w (|P(u)w|^2 - gamma^2 |w|^2) <= 0``.

    Here ``prob.payoff(u, w)`` must return the pair ``(|P(u)w|^2, |w|^2)``.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    g2 = gamma * gamma

    def slack(u):
        return max(z2 - g2 * w2 for z2, w2 in (prob.payoff(u, w) for w in prob.disturbances))

    return min(slack(u) for u in prob.decisions) <= 0


# ---------------------------------------------------------------------------
# finite dynamic programming


@dataclass(frozen=True)
class FiniteDpProblem:
    """``x_{t+1} = dynamics(t, x, u)``, cost ``sum_t stage_cost(t, x_{t+1}, u, x)``."""

    horizon: int
    states: tuple
    controls: tuple
    dynamics: Callable[[int, Hashable, Any], Hashable]
    stage_cost: Callable[[int, Hashable, Any, Hashable], float]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "controls", tuple(self.controls))
        if self.horizon < 1:
            raise DimensionError(f"horizon must be positive, got {self.horizon}")
        if not self.states or not self.controls:
            raise DimensionError("state and control sets must be nonempty")


def dp_solve(dp: FiniteDpProblem):
    """Backward induction.

    Returns ``(V, policy)`` with ``V[(t, x)]`` for ``t = 1..T+1`` (zero at
    ``T+1``) and ``policy[(t, x)]`` the first minimizing control.
    """
    T = dp.horizon
    state_set = set(dp.states)
    V = {(T + 1, x): 0.0 for x in dp.states}
    policy = {}
    for t in range(T, 0, -1):
        for x in dp.states:
            best_u, best_v = None, np.inf
            for u in dp.controls:
                xn = dp.dynamics(t, x, u)
                if xn not in state_set:
                    raise ValueError(f"dynamics left the state set: f({t}, {x!r}, {u!r}) = {xn!r}")
                v = dp.stage_cost(t, xn, u, x) + V[(t + 1, xn)]
                if v < best_v:
                    best_u, best_v = u, v
            V[(t, x)] = best_v
            policy[(t, x)] = best_u
    return V, policy


def dp_rollout(dp: FiniteDpProblem, policy: Mapping, x1):
    """Cost of following ``policy`` from ``x1``, accumulated back to front."""
    xs, us = [x1], []
    for t in range(1, dp.horizon + 1):
        u = policy[(t, xs[-1])]
        us.append(u)
        xs.append(dp.dynamics(t, xs[-1], u))
    cost = 0.0
    for t in range(dp.horizon, 0, -1):
        cost = dp.stage_cost(t, xs[t], us[t - 1], xs[t - 1]) + cost
    return cost, xs, us


# ---------------------------------------------------------------------------
# N-player LQ games


@dataclass(frozen=True)
class LqGame:
    A: tuple
    B: tuple
    Q: tuple
    R: tuple
    x1: np.ndarray

    def __post_init__(self):
        A = tuple(la.frozen(a, "A") for a in self.A)
        B = tuple(tuple(la.frozen(b, "B") for b in bi) for bi in self.B)
        Q = tuple(tuple(la.frozen(q, "Q") for q in qi) for qi in self.Q)
        R = tuple(tuple(la.frozen(r, "R") for r in ri) for ri in self.R)
        x1 = la.frozen(self.x1, "x1")
        for name, v in (("A", A), ("B", B), ("Q", Q), ("R", R), ("x1", x1)):
            object.__setattr__(self, name, v)
        T, N = len(A), len(B)
        if T < 1 or N < 1:
            raise DimensionError("need at least one stage and one player")
        n = A[0].shape[0]
        if x1.shape != (n, 1):
            raise DimensionError(f"x1 must have length {n}")
        if len(Q) != N or len(R) != N:
            raise DimensionError("B, Q, R need one list per player")
        for t, a in enumerate(A):
            if a.shape != (n, n):
                raise DimensionError(f"A_{t + 1} must be {n}x{n}")
        for i in range(N):
            if not (len(B[i]) == len(Q[i]) == len(R[i]) == T):
                raise DimensionError(f"player {i}: B, Q, R need {T} entries each")
            m = B[i][0].shape[1]
            for t in range(T):
                if B[i][t].shape != (n, m):
                    raise DimensionError(f"B^{i}_{t + 1} must be {n}x{m}")
                q, r = Q[i][t], R[i][t]
                if q.shape != (n, n) or la.max_abs(q - q.T) > 1e-10 or np.linalg.eigvalsh(q).min() < -1e-12:
                    raise DimensionError(f"Q^{i}_{t + 2} must be symmetric PSD {n}x{n}")
                if r.shape != (m, m) or la.max_abs(r - r.T) > 1e-10 or np.linalg.eigvalsh(r).min() <= 0:
                    raise DimensionError(f"R^{i}_{t + 1} must be symmetric PD {m}x{m}")

    @property
    def T(self) -> int:
        return len(self.A)

    @property
    def N(self) -> int:
        return len(self.B)

    @property
    def n(self) -> int:
        return self.A[0].shape[0]

    def m(self, i: int) -> int:
        return self.B[i][0].shape[1]

    def A_at(self, t: int) -> np.ndarray:
        return self.A[t - 1]

    def B_at(self, i: int, t: int) -> np.ndarray:
        return self.B[i][t - 1]

    def R_at(self, i: int, t: int) -> np.ndarray:
        return self.R[i][t - 1]

    def Q_at(self, i: int, t: int) -> np.ndarray:
        """State weight on ``x_t``, defined for ``t = 2..T+1``."""
        if not 2 <= t <= self.T + 1:
            raise IndexError(f"Q_t defined for t=2..{self.T + 1}, got {t}")
        return self.Q[i][t - 2]


@dataclass(frozen=True)
class NashSolution:
    """Backward-recursion outputs, all keyed by stage time ``t``.

    ``x[t]`` for 1..T+1; ``u[i][t]``, ``P[i][t]`` for 1..T; ``S[i][t]`` and
    ``costates[i][t]`` for 2..T+1; ``s[i][t]`` for 1..T+1; ``K[t]`` is the
    stacked feedback with ``u_t = K[t] x_t``.
    """

    x: dict
    u: tuple
    S: tuple
    s: tuple
    P: tuple
    K: dict
    costates: tuple


def game_step(game: LqGame, t: int, x, controls: Sequence) -> np.ndarray:
    """``A_t x + sum_j B^j_t u^j`` with players summed in order."""
    out = game.A_at(t) @ x
    for j, u in enumerate(controls):
        out = out + game.B_at(j, t) @ u
    return out


def _others(game: LqGame, i: int, t: int, controls: Sequence) -> np.ndarray:
    acc = np.zeros((game.n, 1))
    for j, u in enumerate(controls):
        if j != i:
            acc = acc + game.B_at(j, t) @ u
    return acc


def lq_nash_solve(game: LqGame, cond_max: float = la.COND_MAX) -> NashSolution:
    """Open-loop Nash solution of the LQ game via the stagewise relations.

    ``s^i_t`` is carried backward as ``Phi^i_t x_t``; at each stage the
    controls of all players, which appear in each other's relations, are
    found from one stacked linear solve that gives ``u_t = K_t x_t``.

    Raises
    ------
    SingularFactorError
        ``R^i_t + B^i' S^i_{t+1} B^i`` or the stacked coupling matrix is
        singular at some stage.
    """
    T, N, n = game.T, game.N, game.n
    ms = [game.m(i) for i in range(N)]
    offs = np.concatenate([[0], np.cumsum(ms)])
    mtot = int(offs[-1])

    S = [dict() for _ in range(N)]
    Phi = [dict() for _ in range(N)]
    P = [dict() for _ in range(N)]
    K = {}
    for i in range(N):
        S[i][T + 1] = game.Q_at(i, T + 1).copy()
        Phi[i][T + 1] = np.zeros((n, n))

    for t in range(T, 0, -1):
        A = game.A_at(t)
        Bs = [game.B_at(j, t) for j in range(N)]
        for i in range(N):
            Si = S[i][t + 1]
            P[i][t] = la.solve(game.R_at(i, t) + Bs[i].T @ Si @ Bs[i], Bs[i].T,
                               f"R+B'SB (player {i}, t={t})", cond_max)
        M = np.eye(mtot)
        rhs = np.zeros((mtot, n))
        for i in range(N):
            bi = slice(offs[i], offs[i + 1])
            Pi, Si, Fi = P[i][t], S[i][t + 1], Phi[i][t + 1]
            for j in range(N):
                coup = Fi if j == i else Si + Fi
                M[bi, offs[j]:offs[j + 1]] += Pi @ coup @ Bs[j]
            rhs[bi] = -Pi @ (Si + Fi) @ A
        Kt = la.solve(M, rhs, f"stacked coupling system (t={t})", cond_max)
        K[t] = Kt
        Ks = [Kt[offs[j]:offs[j + 1]] for j in range(N)]
        Acl = A + sum(Bs[j] @ Ks[j] for j in range(N))
        for i in range(N):
            Si = S[i][t + 1]
            Ei = np.eye(n) - Bs[i] @ P[i][t] @ Si
            others = sum((Bs[j] @ Ks[j] for j in range(N) if j != i), np.zeros((n, n)))
            Phi[i][t] = A.T @ Ei.T @ (Phi[i][t + 1] @ Acl + Si @ others)
            if t >= 2:
                S[i][t] = game.Q_at(i, t) + A.T @ Si @ Ei @ A

    x = {1: np.array(game.x1)}
    u = [dict() for _ in range(N)]
    for t in range(1, T + 1):
        us = [K[t][offs[j]:offs[j + 1]] @ x[t] for j in range(N)]
        for j in range(N):
            u[j][t] = us[j]
        x[t + 1] = game_step(game, t, x[t], us)

    s = [{t: Phi[i][t] @ x[t] for t in range(1, T + 2)} for i in range(N)]
    for i in range(N):
        s[i][T + 1] = np.zeros((n, 1))
    costates = []
    for i in range(N):
        p = {t: (S[i][t] - game.Q_at(i, t)) @ x[t] + s[i][t] for t in range(2, T + 1)}
        p[T + 1] = np.zeros((n, 1))
        costates.append(p)
    return NashSolution(x, tuple(u), tuple(S), tuple(s), tuple(P), K, tuple(costates))


def _controls_at(sol_u, t):
    return [ui[t] for ui in sol_u]


def stagewise_residuals(game: LqGame, sol: NashSolution) -> dict:
    """Max-abs residual of each stagewise relation over all players and stages.

    Keys: ``control`` (the control law), ``gain`` (``(R + B'SB) P - B'``),
    ``riccati`` (the ``S`` recursion, t=2..T) and ``adjoint`` (the ``s``
    recursion, t=1..T).
    """
    out = {"control": 0.0, "gain": 0.0, "riccati": 0.0, "adjoint": 0.0}
    n = game.n
    for t in range(1, game.T + 1):
        A = game.A_at(t)
        us = _controls_at(sol.u, t)
        for i in range(game.N):
            B, R = game.B_at(i, t), game.R_at(i, t)
            Pi, Sn, sn = sol.P[i][t], sol.S[i][t + 1], sol.s[i][t + 1]
            zeta = _others(game, i, t, us)
            ctl = us[i] + Pi @ Sn @ A @ sol.x[t] + Pi @ (sn + Sn @ zeta)
            gain = (R + B.T @ Sn @ B) @ Pi - B.T
            E = np.eye(n) - B @ Pi @ Sn
            adj = sol.s[i][t] - A.T @ E.T @ (sn + Sn @ zeta)
            out["control"] = max(out["control"], la.max_abs(ctl))
            out["gain"] = max(out["gain"], la.max_abs(gain))
            out["adjoint"] = max(out["adjoint"], la.max_abs(adj))
            if t >= 2:
                ric = sol.S[i][t] - (game.Q_at(i, t) + A.T @ Sn @ E @ A)
                out["riccati"] = max(out["riccati"], la.max_abs(ric))
    return out


# ---------------------------------------------------------------------------
# Pontryagin conditions


@dataclass(frozen=True)
class PontryaginReport:
    """Residuals keyed by ``t`` (dynamics), ``(i, t)`` (costate, stationarity)
    or ``i`` (transversality)."""

    dynamics: dict
    costate: dict
    stationarity: dict
    transversality: dict

    def worst(self) -> dict:
        def mx(d):
            return max(d.values()) if d else 0.0

        return {
            "dynamics": mx(self.dynamics),
            "costate": mx(self.costate),
            "stationarity": mx(self.stationarity),
            "transversality": mx(self.transversality),
        }


def _by_time(seq, start: int) -> dict:
    if isinstance(seq, Mapping):
        return dict(seq)
    return {start + k: v for k, v in enumerate(seq)}


def stage_cost(game: LqGame, i: int, t: int, x_next, u_i) -> float:
    """``(x_{t+1}' Q^i_{t+1} x_{t+1} + u^i' R^i_t u^i) / 2``."""
    return float(0.5 * (x_next.T @ game.Q_at(i, t + 1) @ x_next + u_i.T @ game.R_at(i, t) @ u_i)[0, 0])


def stage_hamiltonian(game: LqGame, i: int, t: int, p_next, controls, x) -> float:
    xn = game_step(game, t, x, controls)
    return stage_cost(game, i, t, xn, controls[i]) + float((p_next.T @ xn)[0, 0])


def pontryagin_residuals(game: LqGame, trajectory, controls, costates, h: float = 1e-5) -> PontryaginReport:
    """Evaluate the discrete Pontryagin conditions on a candidate solution.

    ``trajectory`` maps t=1..T+1 to states, ``controls[i]`` maps t=1..T to
    controls, ``costates[i]`` maps t=2..T+1 to costates.  Sequences are
    accepted in place of mappings and are read from those starting times.
    The stationarity entry is the max-abs central-difference gradient of the
    player's stage Hamiltonian in its own control.
    """
    T, N = game.T, game.N
    x = _by_time(trajectory, 1)
    u = [_by_time(c, 1) for c in controls]
    p = [_by_time(c, 2) for c in costates]
    if len(u) != N or len(p) != N:
        raise DimensionError(f"expected controls and costates for {N} players")
    try:
        dyn, cos, sta, tra = {}, {}, {}, {}
        for t in range(1, T + 1):
            us = _controls_at(u, t)
            dyn[t] = la.max_abs(x[t + 1] - game_step(game, t, x[t], us))
            for i in range(N):
                if t >= 2:
                    r = p[i][t] - game.A_at(t).T @ (p[i][t + 1] + game.Q_at(i, t + 1) @ x[t + 1])
                    cos[(i, t)] = la.max_abs(r)
                grad = np.zeros(game.m(i))
                for k in range(game.m(i)):
                    e = np.zeros((game.m(i), 1))
                    e[k, 0] = h
                    plus = list(us)
                    minus = list(us)
                    plus[i] = us[i] + e
                    minus[i] = us[i] - e
                    hp = stage_hamiltonian(game, i, t, p[i][t + 1], plus, x[t])
                    hm = stage_hamiltonian(game, i, t, p[i][t + 1], minus, x[t])
                    grad[k] = (hp - hm) / (2 * h)
                sta[(i, t)] = la.max_abs(grad)
        for i in range(N):
            tra[i] = la.max_abs(p[i][T + 1])
    except (KeyError, ValueError) as exc:
        raise DimensionError(f"inconsistent candidate: {exc}") from None
    return PontryaginReport(dyn, cos, sta, tra)


# ---------------------------------------------------------------------------
# costs and deviations


def simulate_game(game: LqGame, controls: Sequence[Mapping]) -> dict:
    x = {1: np.array(game.x1)}
    for t in range(1, game.T + 1):
        x[t + 1] = game_step(game, t, x[t], _controls_at(controls, t))
    return x


def game_cost(game: LqGame, controls: Sequence[Mapping], i: int) -> float:
    """Player ``i``'s cost along the trajectory generated by ``controls``."""
    x = simulate_game(game, controls)
    return sum(stage_cost(game, i, t, x[t + 1], controls[i][t]) for t in range(1, game.T + 1))


TERM_NAMES = ("cross", "quadratic_gain", "coupling", "others", "drift")


def lq_nash_cost_breakdown(game: LqGame, sol: NashSolution, i: int) -> dict:
    """Term-by-term closed-form cost next to the simulated per-stage cost.

    The five closed-form terms, per stage ``t`` with ``w = A x + zeta`` and
    ``zeta`` the other players' input:

    * ``cross``          x'A'Q(-BPQAx - BPQ zeta + zeta)
    * ``quadratic_gain`` w'QP'(B'QB + R)PQw / 2
    * ``coupling``       -w'QP'B'Q zeta
    * ``others``         zeta'Q zeta / 2
    * ``drift``          x'A'QAx / 2

    ``Q`` is ``Q^i_{t+1}`` and ``P`` is the solved ``P^i_t``.
    """
    T = game.T
    terms = {k: 0.0 for k in TERM_NAMES}
    stage_formula, stage_sim = [], []
    for t in range(1, T + 1):
        A, B, R = game.A_at(t), game.B_at(i, t), game.R_at(i, t)
        Q = game.Q_at(i, t + 1)
        P = sol.P[i][t]
        x = sol.x[t]
        us = _controls_at(sol.u, t)
        zeta = _others(game, i, t, us)
        Ax = A @ x
        w = Ax + zeta
        BPQ = B @ P @ Q
        parts = {
            "cross": (Ax.T @ Q @ (-BPQ @ Ax - BPQ @ zeta + zeta))[0, 0],
            "quadratic_gain": 0.5 * (w.T @ Q @ P.T @ (B.T @ Q @ B + R) @ P @ Q @ w)[0, 0],
            "coupling": -(w.T @ Q @ P.T @ B.T @ Q @ zeta)[0, 0],
            "others": 0.5 * (zeta.T @ Q @ zeta)[0, 0],
            "drift": 0.5 * (Ax.T @ Q @ Ax)[0, 0],
        }
        for k, v in parts.items():
            terms[k] += float(v)
        stage_formula.append(float(sum(parts.values())))
        stage_sim.append(stage_cost(game, i, t, sol.x[t + 1], us[i]))
    return {
        "terms": terms,
        "stage_formula": stage_formula,
        "stage_simulated": stage_sim,
        "stage_diff": [f - s for f, s in zip(stage_formula, stage_sim)],
        "formula_cost": float(sum(stage_formula)),
        "simulated_cost": float(sum(stage_sim)),
    }


def lq_nash_cost(game: LqGame, sol: NashSolution, i: int) -> tuple[float, float]:
    """``(formula_cost, simulated_cost)`` for player ``i``; neither is taken as ground truth."""
    b = lq_nash_cost_breakdown(game, sol, i)
    return b["formula_cost"], b["simulated_cost"]


def deviation_sweep(game: LqGame, sol: NashSolution, i: int, grid: Sequence[float]) -> list:
    """Rows ``(stage, delta, cost_change)`` for one-stage unilateral deviations
    of player ``i``'s scalar control, everyone else held open loop."""
    if game.m(i) != 1:
        raise DimensionError(f"player {i} control is not scalar")
    base_controls = [dict(ui) for ui in sol.u]
    base = game_cost(game, base_controls, i)
    rows = []
    for t in range(1, game.T + 1):
        for d in grid:
            ctl = [dict(ui) for ui in base_controls]
            ctl[i][t] = ctl[i][t] + d
            rows.append((t, float(d), game_cost(game, ctl, i) - base))
    return rows


def nash_deviation_check(game: LqGame, sol: NashSolution, i: int, grid: Sequence[float]) -> float:
    """Smallest cost change over the deviation grid; negative means a profitable deviation."""
    rows = deviation_sweep(game, sol, i, grid)
    return min(r[2] for r in rows) if rows else 0.0
