"""Boolean control networks in algebraic form ``x(k+1) = L ⋉ u(k) ⋉ x(k)``.

States live in ``Delta_{2^n}`` and controls in ``Delta_{2^m}``.  Node update
tables take their inputs in the order ``(u_1..u_m, x_1..x_n)`` so that the
column of ``L`` hit by ``u ⋉ x`` is the canonical input index of that tuple.

The transition operand passed to :func:`step` may also be any dense matrix
whose STP chain with ``u`` and ``x`` closes on a delta column, such as the
``1 x 2^m`` row used in the optimality analysis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .errors import DimensionError
from .stp import (
    DeltaVector,
    LogicalMatrix,
    TruthTable,
    delta,
    densify,
    stp,
    stp_chain,
    stp_chain_dims,
    to_delta,
)


@dataclass(frozen=True)
class BooleanNetwork:
    n: int
    m: int
    node_updates: tuple
    transition: LogicalMatrix
    names: tuple = ()

    @classmethod
    def from_tables(cls, node_updates: Sequence[TruthTable], n: int, m: int, names=None):
        tables = tuple(node_updates)
        L = assemble_transition(tables, n, m)
        names = tuple(names) if names else tuple(f"x{k + 1}" for k in range(n))
        if len(names) != n:
            raise DimensionError(f"expected {n} node names, got {len(names)}")
        return cls(n, m, tables, L, names)

    @property
    def state_count(self) -> int:
        return 2**self.n

    @property
    def control_count(self) -> int:
        return 2**self.m


@dataclass(frozen=True)
class Trajectory:
    states: tuple
    controls: tuple

    def __post_init__(self):
        if len(self.states) != len(self.controls) + 1:
            raise DimensionError("a trajectory has exactly one more state than controls")


@dataclass(frozen=True)
class CycleReport:
    transient_length: int
    cycle_states: tuple

    @property
    def cycle_length(self) -> int:
        return len(self.cycle_states)

    @property
    def is_fixed_point(self) -> bool:
        return self.cycle_length == 1


def assemble_transition(node_updates: Sequence[TruthTable], n: int, m: int) -> LogicalMatrix:
    """Build ``L`` in ``L_{2^n x 2^(m+n)}`` from per-node update tables."""
    if n < 1 or m < 1:
        raise DimensionError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    if len(node_updates) != n:
        raise DimensionError(f"expected {n} node tables, got {len(node_updates)}")
    for k, tt in enumerate(node_updates):
        if tt.arity != m + n:
            raise DimensionError(f"node {k + 1} table has arity {tt.arity}, expected {m + n}")
    outs = np.array([tt.outputs for tt in node_updates], dtype=bool)  # n x 2^(m+n)
    # next-state index: big-endian over nodes, True -> 0
    weights = 2 ** np.arange(n - 1, -1, -1)
    idx = (~outs).astype(int).T @ weights
    return LogicalMatrix(2**n, tuple(int(i) + 1 for i in idx))


def _transition_of(net):
    return net.transition if isinstance(net, BooleanNetwork) else net


def step(L, u, x) -> DeltaVector:
    """One update ``L ⋉ u ⋉ x``; the result must be a delta column."""
    out = stp(stp(L, u), x)
    if isinstance(out, DeltaVector):
        return out
    shape = out.shape
    if shape[1] != 1:
        raise DimensionError(f"L ⋉ u ⋉ x has shape {shape}, not a column")
    try:
        return to_delta(out)
    except DimensionError:
        raise DimensionError("L ⋉ u ⋉ x is a column but not a delta vector") from None


def simulate(net, controls: Sequence, x0) -> Trajectory:
    """Roll the network forward under an open-loop control list."""
    L = _transition_of(net)
    x = to_delta(x0)
    if isinstance(net, BooleanNetwork):
        if x.dim != net.state_count:
            raise DimensionError(f"x0 has dimension {x.dim}, expected {net.state_count}")
        for k, u in enumerate(controls):
            if to_delta(u).dim != net.control_count:
                raise DimensionError(f"control {k} has wrong dimension")
    states = [x]
    ctrl = []
    for u in controls:
        u = to_delta(u)
        x = step(L, u, x)
        ctrl.append(u)
        states.append(x)
    return Trajectory(tuple(states), tuple(ctrl))


Policy = Union[Mapping[int, object], Sequence, Callable[[DeltaVector], object]]


def _policy_fn(policy: Policy, control_dim: int | None):
    def as_control(c):
        if isinstance(c, (int, np.integer)):
            if control_dim is None:
                raise DimensionError("integer policy entries need a known control dimension")
            return delta(control_dim, int(c))
        return to_delta(c)

    if callable(policy) and not isinstance(policy, Mapping):
        return lambda x: as_control(policy(x))
    if isinstance(policy, Mapping):
        return lambda x: as_control(policy[x.index])
    table = list(policy)
    return lambda x: as_control(table[x.index - 1])


def find_cycle(net, policy: Policy, x0) -> CycleReport:
    """Split the closed-loop orbit from ``x0`` into transient and cycle.

    ``policy`` maps a state (by 1-based index) to a control: a mapping, a
    sequence indexed by state, or a callable on :class:`DeltaVector`.
    Integer entries are read as control indices.
    """
    L = _transition_of(net)
    x = to_delta(x0)
    cdim = net.control_count if isinstance(net, BooleanNetwork) else None
    act = _policy_fn(policy, cdim)
    seen: dict[int, int] = {}
    orbit: list[DeltaVector] = []
    # pigeonhole: some state repeats within dim + 1 visits
    for k in range(x.dim + 1):
        if x.index in seen:
            start = seen[x.index]
            return CycleReport(start, tuple(orbit[start:]))
        seen[x.index] = k
        orbit.append(x)
        x = step(L, act(x), x)
    raise AssertionError("orbit longer than the state space")  # unreachable


def attractors(net: BooleanNetwork, policy: Policy) -> dict[int, CycleReport]:
    """Cycle report for every initial state, keyed by 1-based state index."""
    return {
        i: find_cycle(net, policy, delta(net.state_count, i))
        for i in range(1, net.state_count + 1)
    }


def boolean_stationarity_residual(L, P, R, u, x) -> np.ndarray:
    """``u^T R - x^T ⋉ u^T ⋉ L^T ⋉ P ⋉ x ⋉ L`` with every product an STP."""
    Ld, ud, xd = densify(L), densify(u), densify(x)
    lhs = stp(ud.T, densify(R))
    rhs = stp_chain(xd.T, ud.T, Ld.T, densify(P), xd, Ld)
    lhs, rhs = densify(lhs), densify(rhs)
    if lhs.shape != rhs.shape:
        raise DimensionError(f"u^T R has shape {lhs.shape} but the right side has {rhs.shape}")
    return lhs - rhs


def optimal_control_rhs(u, m: int, n: int, i: int) -> np.ndarray:
    """Right side ``d_m ⋉ d_n^T ⋉ d_m^T ⋉ u ⋉ d_n`` with ``d_k = delta_{2^k}^i``."""
    _check_index(m, n, i)
    dm = delta(2**m, i).dense()
    dn = delta(2**n, i).dense()
    return densify(stp_chain(dm, dn.T, dm.T, densify(u), dn))


def optimal_rhs_dims(m: int, n: int) -> tuple[int, int]:
    """Shape of :func:`optimal_control_rhs` from shapes alone."""
    return stp_chain_dims([(2**m, 1), (1, 2**n), (1, 2**m), (2**m, 1), (2**n, 1)])


def fixed_point_candidates(m: int, n: int, i: int) -> list[int]:
    """Indices ``k`` for which ``u = delta_{2^m}^k`` solves ``u = rhs(u)``."""
    _check_index(m, n, i)
    sols = []
    for k in range(1, 2**m + 1):
        u = delta(2**m, k).dense()
        if np.array_equal(optimal_control_rhs(u, m, n, i), u):
            sols.append(k)
    return sols


def row_transition(m: int, i: int) -> np.ndarray:
    """The ``1 x 2^m`` row ``(delta_{2^m}^i)^T`` used as transition operand."""
    return delta(2**m, i).dense().T


def verify_optimal_fixed_point(m: int, n: int, i: int) -> bool:
    """Check that ``u = delta_{2^m}^i`` solves the STP stationarity equation and
    that the closed loop from ``delta_{2^n}^i`` with the row transition is a
    fixed point."""
    _check_index(m, n, i)
    u = delta(2**m, i)
    if not np.array_equal(optimal_control_rhs(u.dense(), m, n, i), u.dense()):
        return False
    L = row_transition(m, i)
    rep = find_cycle(L, lambda _x: u, delta(2**n, i))
    return rep.transient_length == 0 and rep.is_fixed_point


def _check_index(m: int, n: int, i: int) -> None:
    if m < 1 or n < 1:
        raise DimensionError(f"need m, n >= 1, got m={m}, n={n}")
    if not 1 <= i <= min(2**m, 2**n):
        raise DimensionError(f"index {i} out of range 1..{min(2**m, 2**n)}")
