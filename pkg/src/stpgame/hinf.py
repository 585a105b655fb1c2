"""Stationary discrete-time H-infinity computations.

Plant::

    x+ = A x + B u + D w,   y = C x + E w,   z = H x + G u

Riccati kernels ``S`` and ``Sigma`` are obtained from the linear (Stein)
equations satisfied by their inverses, which are solved exactly on the
symmetric subspace and then inverted under a condition-number guard.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _linalg as la
from .errors import ConvergenceError, DimensionError, SingularFactorError

CONVENTIONS = ("max_modulus", "max_real")
RADII = ("MS", "SigmaTildeS", "SigmaQ", "SigmaSbar")
CONDITIONS = RADII + ("branch1", "branch2")
THRESHOLD_TOL = 1e-6


@dataclass(frozen=True)
class HinfPlant:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        for name in "ABCDEGH":
            object.__setattr__(self, name, la.frozen(getattr(self, name), name))
        n = self.A.shape[0]
        mu, mw = self.B.shape[1], self.D.shape[1]
        p, q = self.C.shape[0], self.H.shape[0]
        expect = {
            "A": (n, n), "B": (n, mu), "C": (p, n), "D": (n, mw),
            "E": (p, mw), "G": (q, mu), "H": (q, n),
        }
        for name, shape in expect.items():
            if getattr(self, name).shape != shape:
                raise DimensionError(f"{name} must be {shape[0]}x{shape[1]}, got {getattr(self, name).shape}")

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class DerivedMatrices:
    R: np.ndarray
    P: np.ndarray
    L: np.ndarray
    N: np.ndarray
    Q: np.ndarray
    M: np.ndarray
    Abar: np.ndarray
    Atilde: np.ndarray
    B: np.ndarray
    C: np.ndarray


@dataclass(frozen=True)
class AuxiliaryMatrices:
    Gamma: np.ndarray
    Sbar: np.ndarray
    Delta: np.ndarray
    SigmaTilde: np.ndarray


def derive(plant: HinfPlant, cond_max: float = la.COND_MAX) -> DerivedMatrices:
    """Products ``R=G'G, P=H'G, L=ED', N=EE', Q=H'H, M=DD'`` and the shifted
    dynamics ``Abar = A - B R^-1 P'``, ``Atilde = A - L' N^-1 C``."""
    A, B, C, D, E, G, H = (plant.A, plant.B, plant.C, plant.D, plant.E, plant.G, plant.H)
    R, P, L, N = G.T @ G, H.T @ G, E @ D.T, E @ E.T
    Abar = A - B @ la.solve(R, P.T, "R = G'G", cond_max)
    Atilde = A - L.T @ la.solve(N, C, "N = EE'", cond_max)
    return DerivedMatrices(R, P, L, N, H.T @ H, D @ D.T, Abar, Atilde, B, C)


def hinf_cost(z, w, gamma: float, x0=None, x_final=None) -> float:
    """Disturbance-attenuation cost.

    With both boundary states, ``|x_final|^2 + sum(|z|^2 - g^2 |w|^2) - g^2 |x0|^2``;
    with neither, only the sum.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if len(z) != len(w):
        raise DimensionError(f"z and w differ in length ({len(z)} vs {len(w)})")
    if (x0 is None) != (x_final is None):
        raise ValueError("supply both boundary states or neither")
    g2 = gamma * gamma
    total = 0.0
    for zt, wt in zip(z, w):
        zt, wt = np.ravel(np.asarray(zt, float)), np.ravel(np.asarray(wt, float))
        total += float(zt @ zt) - g2 * float(wt @ wt)
    if x0 is not None:
        x0, xf = np.ravel(np.asarray(x0, float)), np.ravel(np.asarray(x_final, float))
        total += float(xf @ xf) - g2 * float(x0 @ x0)
    return total


# ---------------------------------------------------------------------------
# auxiliary matrices and Riccati residuals


def gamma_matrix(d: DerivedMatrices, S_next, gamma, cond_max=la.COND_MAX):
    g = gamma ** -2.0
    Rinv_Bt = la.solve(d.R, d.B.T, "R = G'G", cond_max)
    inner = la.inv(S_next, "S", cond_max) + d.B @ Rinv_Bt - g * d.M
    return la.inv(inner, "Gamma", cond_max)


def sbar_matrix(d: DerivedMatrices, S_next, gamma, cond_max=la.COND_MAX):
    g = gamma ** -2.0
    inner = la.inv(S_next - g * d.M, "S - g^-2 M", cond_max)
    return d.Abar.T @ inner @ d.Abar + d.Q - d.P @ la.solve(d.R, d.P.T, "R = G'G", cond_max)


def delta_matrix(d: DerivedMatrices, Sigma, gamma, cond_max=la.COND_MAX):
    g = gamma ** -2.0
    inner = la.inv(Sigma, "Sigma", cond_max) + d.C.T @ d.N @ d.C - g * d.Q
    return la.inv(inner, "Delta", cond_max)


def sigma_tilde_matrix(d: DerivedMatrices, Sigma, gamma, cond_max=la.COND_MAX):
    g = gamma ** -2.0
    inner = la.inv(la.inv(Sigma, "Sigma", cond_max) - g * d.Q, "Sigma^-1 - g^-2 Q", cond_max)
    return d.Atilde @ inner @ d.Atilde.T + d.M - d.L.T @ la.solve(d.N, d.L, "N = EE'", cond_max)


def auxiliary(d: DerivedMatrices, S, Sigma, gamma, cond_max=la.COND_MAX) -> AuxiliaryMatrices:
    S, Sigma = la.as_matrix(S, "S"), la.as_matrix(Sigma, "Sigma")
    return AuxiliaryMatrices(
        gamma_matrix(d, S, gamma, cond_max),
        sbar_matrix(d, S, gamma, cond_max),
        delta_matrix(d, Sigma, gamma, cond_max),
        sigma_tilde_matrix(d, Sigma, gamma, cond_max),
    )


def riccati_step_residuals(d: DerivedMatrices, S_t, S_next, Sigma_t, Sigma_next, gamma,
                           cond_max=la.COND_MAX):
    """One step of the time-varying kernel recursions, as residual matrices.

    ``S_t - (Abar' Gamma_t Abar + Q - P R^-1 P')`` with ``Gamma_t`` built from
    ``S_{t+1}``, and ``Sigma_{t+1} - (Atilde Delta_t Atilde' + M - L' N^-1 L)``
    with ``Delta_t`` built from ``Sigma_t``.  ``d`` holds the stage-``t`` matrices.
    """
    S_t, S_next = la.as_matrix(S_t, "S"), la.as_matrix(S_next, "S")
    Sigma_t, Sigma_next = la.as_matrix(Sigma_t, "Sigma"), la.as_matrix(Sigma_next, "Sigma")
    Gam = gamma_matrix(d, S_next, gamma, cond_max)
    PRP = d.P @ la.solve(d.R, d.P.T, "R = G'G", cond_max)
    res_S = S_t - (d.Abar.T @ Gam @ d.Abar + d.Q - PRP)
    Dlt = delta_matrix(d, Sigma_t, gamma, cond_max)
    LNL = d.L.T @ la.solve(d.N, d.L, "N = EE'", cond_max)
    res_Sigma = Sigma_next - (d.Atilde @ Dlt @ d.Atilde.T + d.M - LNL)
    return res_S, res_Sigma


def riccati_residuals(d: DerivedMatrices, S, Sigma, gamma, cond_max=la.COND_MAX):
    """Stationary kernel residuals ``(res_S, res_Sigma)``.

    Raises
    ------
    SingularFactorError
        An inner inverse (``S``, ``Gamma``, ``Sigma`` or ``Delta``) does not
        exist; ``.factor`` names which one.
    """
    return riccati_step_residuals(d, S, S, Sigma, Sigma, gamma, cond_max)


# ---------------------------------------------------------------------------
# inverse (Stein) forms


def _square_inverse(m, name, cond_max):
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} is {m.shape[0]}x{m.shape[1]}; the inverse forms need it square")
    return la.inv(m, name, cond_max)


def stein_data(plant: HinfPlant, gamma: float, cond_max=la.COND_MAX):
    """Coefficients ``(W_S, Y_S, W_Sigma, Y_Sigma)`` of the two equations
    ``W X W' - X = Y`` satisfied by ``S^-1`` and ``Sigma^-1``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    g = gamma ** -2.0
    Ginv = _square_inverse(plant.G, "G", cond_max)
    Einv = _square_inverse(plant.E, "E", cond_max)
    BG = plant.B @ Ginv
    EC = Einv @ plant.C
    W_S = plant.A - BG @ plant.H
    Y_S = BG @ BG.T - g * plant.D @ plant.D.T
    V = plant.A - plant.D @ EC
    Y_Sig = EC.T @ EC - g * plant.H.T @ plant.H
    return W_S, Y_S, V.T, Y_Sig


def inverse_form_residuals(plant: HinfPlant, S_inv, Sigma_inv, gamma, cond_max=la.COND_MAX):
    """LHS minus RHS of the two inverse-kernel equations.

    ``(A - B G^-1 H) S^-1 (A - B G^-1 H)' - S^-1 - (BG^-1)(BG^-1)' + g^-2 DD'`` and
    ``(A - D E^-1 C)' Sigma^-1 (A - D E^-1 C) - Sigma^-1 - (E^-1 C)'(E^-1 C) + g^-2 H'H``.
    """
    W_S, Y_S, W_Sig, Y_Sig = stein_data(plant, gamma, cond_max)
    X = la.as_matrix(S_inv, "S_inv")
    Z = la.as_matrix(Sigma_inv, "Sigma_inv")
    return W_S @ X @ W_S.T - X - Y_S, W_Sig @ Z @ W_Sig.T - Z - Y_Sig


def _duplication(n: int):
    """Duplication matrix ``Dn`` (vec X = Dn vech X) and its left inverse."""
    pairs = [(i, j) for j in range(n) for i in range(j, n)]
    Dn = np.zeros((n * n, len(pairs)))
    En = np.zeros((len(pairs), n * n))
    for k, (i, j) in enumerate(pairs):
        Dn[i + j * n, k] = 1.0
        Dn[j + i * n, k] = 1.0
        En[k, i + j * n] = 1.0
    return Dn, En


def solve_stein(W, Y, cond_max=la.COND_MAX, label="Stein operator"):
    """Symmetric solution of ``W X W' - X = Y``.

    The operator is vectorized as ``kron(W, W) - I`` and restricted to the
    symmetric subspace through the duplication matrix, giving a square
    system of size ``n(n+1)/2``.
    """
    W, Y = la.as_matrix(W, "W"), la.as_matrix(Y, "Y")
    n = W.shape[0]
    if W.shape != (n, n) or Y.shape != (n, n):
        raise DimensionError("W and Y must be square of equal size")
    if la.max_abs(Y - Y.T) > 1e-12 * max(1.0, la.max_abs(Y)):
        raise DimensionError("Y must be symmetric")
    Dn, En = _duplication(n)
    K = np.kron(W, W) - np.eye(n * n)
    Ks = En @ K @ Dn
    c = np.linalg.cond(Ks)
    if not np.isfinite(c) or c > cond_max:
        raise SingularFactorError(label, f"{label} singular (condition number {c:.3e})")
    v = np.linalg.solve(Ks, En @ Y.reshape(-1, order="F"))
    return (Dn @ v).reshape(n, n, order="F")


def solve_inverse_form(plant: HinfPlant, gamma: float, cond_max=la.COND_MAX):
    """Exact solution ``(S_inv, Sigma_inv)`` of the two inverse-kernel equations.

    The returned matrices may be singular (the kernel itself then does not
    exist); :func:`invert_kernel` reports that case.
    """
    W_S, Y_S, W_Sig, Y_Sig = stein_data(plant, gamma, cond_max)
    S_inv = solve_stein(W_S, Y_S, cond_max, "Stein operator (S)")
    Sig_inv = solve_stein(W_Sig, Y_Sig, cond_max, "Stein operator (Sigma)")
    return S_inv, Sig_inv


def invert_kernel(X_inv, name="S", cond_max=la.COND_MAX):
    X_inv = la.as_matrix(X_inv, name + "_inv")
    c = np.linalg.cond(X_inv)
    if not np.isfinite(c) or c > cond_max:
        raise SingularFactorError(name, f"kernel singular at this gamma: {name}^-1 has condition number {c:.3e}")
    return np.linalg.inv(X_inv)


# ---------------------------------------------------------------------------
# spectral radii and gamma feasibility


def spectral_radius(m, convention: str = "max_modulus") -> float:
    """Largest eigenvalue modulus, or (``max_real``) the largest real eigenvalue.

    ``max_real`` returns NaN when the matrix has no real eigenvalue.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    m = la.as_matrix(m, "matrix")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"spectral radius needs a square matrix, got {m.shape}")
    try:
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolve failed: {exc}") from None
    if convention == "max_modulus":
        return float(np.max(np.abs(ev)))
    real = ev[np.abs(ev.imag) <= 1e-12 * np.maximum(1.0, np.abs(ev))].real
    return float(real.max()) if real.size else float("nan")


@dataclass(frozen=True)
class GammaReport:
    gamma: float
    convention: str
    rho_MS: float
    rho_SigmaTildeS: float
    rho_SigmaQ: float
    rho_SigmaSbar: float
    branch1_feasible: bool
    branch2_feasible: bool
    alternate: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)


class _Kernels:
    """Lazily built kernels and products at one gamma."""

    def __init__(self, plant: HinfPlant, gamma: float, cond_max: float):
        self.plant, self.gamma, self.cond_max = plant, gamma, cond_max
        self.d = derive(plant, cond_max)
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def inverses(self):
        return self._get("inv", lambda: solve_inverse_form(self.plant, self.gamma, self.cond_max))

    def S(self):
        return self._get("S", lambda: invert_kernel(self.inverses()[0], "S", self.cond_max))

    def Sigma(self):
        return self._get("Sigma", lambda: invert_kernel(self.inverses()[1], "Sigma", self.cond_max))

    def Sbar(self):
        return self._get("Sbar", lambda: sbar_matrix(self.d, self.S(), self.gamma, self.cond_max))

    def SigmaTilde(self):
        return self._get("St", lambda: sigma_tilde_matrix(self.d, self.Sigma(), self.gamma, self.cond_max))

    def product(self, name):
        if name == "MS":
            return self.d.M @ self.S()
        if name == "SigmaTildeS":
            return self.SigmaTilde() @ self.S()
        if name == "SigmaQ":
            return self.Sigma() @ self.d.Q
        if name == "SigmaSbar":
            return self.Sigma() @ self.Sbar()
        raise ValueError(f"unknown radius {name!r}; expected one of {RADII}")


def auxiliary_certificate(d: DerivedMatrices, S, Sigma, gamma, Sbar, SigmaTilde) -> dict:
    """Scaled residuals of ``Sbar`` and ``SigmaTilde`` against a solve-based
    re-evaluation of their definitions (no explicit inverses)."""
    g = gamma ** -2.0
    Z = np.linalg.solve(S - g * d.M, d.Abar)
    sbar2 = d.Abar.T @ Z + d.Q - d.P @ np.linalg.solve(d.R, d.P.T)
    # (Sigma^-1 - g Q)^-1 = (I - g Sigma Q)^-1 Sigma
    n = Sigma.shape[0]
    Y = np.linalg.solve(np.eye(n) - g * Sigma @ d.Q, Sigma @ d.Atilde.T)
    st2 = d.Atilde @ Y + d.M - d.L.T @ np.linalg.solve(d.N, d.L)

    def scaled(a, b):
        return la.max_abs(a - b) / max(1.0, la.max_abs(b))

    return {"Sbar": scaled(Sbar, sbar2), "SigmaTilde": scaled(SigmaTilde, st2)}


def gamma_report(plant: HinfPlant, gamma: float, convention: str = "max_modulus",
                 cond_max: float = la.COND_MAX) -> GammaReport:
    """The four spectral radii at ``gamma`` and both feasibility branches.

    ``alternate`` holds the radii under the other convention; ``certificate``
    holds :func:`auxiliary_certificate` for the matrices used.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    k = _Kernels(plant, gamma, cond_max)
    other = CONVENTIONS[1 - CONVENTIONS.index(convention)]
    rho = {name: spectral_radius(k.product(name), convention) for name in RADII}
    alt = {name: spectral_radius(k.product(name), other) for name in RADII}
    g2 = gamma * gamma
    b1 = bool(rho["MS"] < g2 and rho["SigmaTildeS"] < g2)
    b2 = bool(rho["SigmaQ"] < g2 and rho["SigmaSbar"] < g2)
    cert = auxiliary_certificate(k.d, k.S(), k.Sigma(), gamma, k.Sbar(), k.SigmaTilde())
    return GammaReport(gamma, convention, rho["MS"], rho["SigmaTildeS"], rho["SigmaQ"],
                       rho["SigmaSbar"], b1, b2, alt, cert)


def condition_holds(plant: HinfPlant, gamma: float, condition: str,
                    convention: str = "max_modulus", cond_max: float = la.COND_MAX) -> bool:
    """Evaluate one radius test ``rho(.) < gamma^2`` or a whole branch."""
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}; expected one of {CONDITIONS}")
    k = _Kernels(plant, gamma, cond_max)
    g2 = gamma * gamma

    def ok(name):
        return spectral_radius(k.product(name), convention) < g2

    if condition == "branch1":
        return ok("MS") and ok("SigmaTildeS")
    if condition == "branch2":
        return ok("SigmaQ") and ok("SigmaSbar")
    return ok(condition)


def bisect_predicate(pred: Callable[[float], bool], lo: float, hi: float,
                     tol: float = THRESHOLD_TOL) -> float:
    """Locate where a Boolean predicate flips on ``[lo, hi]`` to within ``tol``."""
    if not lo < hi:
        raise ValueError(f"bracket must satisfy lo < hi, got [{lo}, {hi}]")
    plo, phi = pred(lo), pred(hi)
    if plo == phi:
        raise ConvergenceError(f"no sign change in bracket [{lo}, {hi}] (condition is {plo} at both ends)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == plo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gamma_threshold(plant: HinfPlant, condition: str, bracket=(1.01, 10.0),
                    convention: str = "max_modulus", tol: float = THRESHOLD_TOL,
                    cond_max: float = la.COND_MAX) -> float:
    """Crossing point of ``condition`` in gamma by bisection."""
    lo, hi = bracket
    return bisect_predicate(lambda g: condition_holds(plant, g, condition, convention, cond_max), lo, hi, tol)


# ---------------------------------------------------------------------------
# infinite-horizon state feedback


def _gain_factors(plant: HinfPlant, cond_max):
    A = plant.A
    n = plant.n
    Ainv_T = la.inv(A, "A", cond_max).T
    IAT_inv = la.inv(np.eye(n) - A.T, "(I-A)", cond_max)
    return Ainv_T, IAT_inv


def hinf_gain(plant: HinfPlant, cond_max: float = la.COND_MAX) -> np.ndarray:
    """Feedback ``K`` with ``u = K x``, transcribed term by term::

        K = -[G'G + B'(I-A')^-1 (I - A'^-1 H'G)]^-1 [B'(I-A')^-1 (I - A'^-1 H'H)]

    The identity inside the first bracket is ``n x n``, so the control
    dimension must equal the state dimension.

    Raises
    ------
    SingularFactorError
        ``A``, ``(I-A)`` or the outer bracket is singular (checked in that order).
    DimensionError
        Control and state dimensions differ.
    """
    n, mu = plant.n, plant.B.shape[1]
    if mu != n:
        raise DimensionError(f"closed-form gain needs control dim == state dim, got {mu} vs {n}")
    Ainv_T, IAT_inv = _gain_factors(plant, cond_max)
    G, H, B = plant.G, plant.H, plant.B
    I = np.eye(n)
    outer = G.T @ G + B.T @ IAT_inv @ (I - Ainv_T @ H.T @ G)
    right = B.T @ IAT_inv @ (I - Ainv_T @ H.T @ H)
    return -la.solve(outer, right, "outer bracket", cond_max)


def stationary_gain(plant: HinfPlant, cond_max: float = la.COND_MAX) -> np.ndarray:
    """Feedback that zeroes both stationarity residuals when the costate is
    taken from the adjoint relation with vanishing successor costate::

        K = -[G'G + F'(I-A'^-1)H'G]^-1 [F'(I-A'^-1)H'H + G'H],  F = (I-A)^-1 B
    """
    Ainv_T, IAT_inv = _gain_factors(plant, cond_max)
    G, H, B = plant.G, plant.H, plant.B
    Ft_J = B.T @ IAT_inv @ (np.eye(plant.n) - Ainv_T)
    outer = G.T @ G + Ft_J @ H.T @ G
    right = Ft_J @ H.T @ H + G.T @ H
    return -la.solve(outer, right, "outer bracket", cond_max)


def adjoint_costate(plant: HinfPlant, x, u, cond_max: float = la.COND_MAX) -> np.ndarray:
    """``p = -2 A'^-1 (H'H x + H'G u)``, the costate when the next one vanishes."""
    x, u = la.as_matrix(x, "x"), la.as_matrix(u, "u")
    Ainv_T = la.inv(plant.A, "A", cond_max).T
    return -2.0 * Ainv_T @ (plant.H.T @ plant.H @ x + plant.H.T @ plant.G @ u)


def stationarity_residual(plant: HinfPlant, x, u, p, cond_max: float = la.COND_MAX):
    """Residuals ``(control, costate)`` of the stationarity and costate relations.

    ``control = 2x'H'H F + 2x'H'G + 2u'G'G + 2u'G'H F + p'F`` with ``F = (I-A)^-1 B``;
    ``costate = p' + 2(x'H'H + u'G'H) A^-1``.  Both are returned as 1-D arrays.
    """
    n, mu = plant.n, plant.B.shape[1]
    x, u, p = la.as_matrix(x, "x"), la.as_matrix(u, "u"), la.as_matrix(p, "p")
    if x.shape != (n, 1) or p.shape != (n, 1) or u.shape != (mu, 1):
        raise DimensionError(f"expected x, p of length {n} and u of length {mu}")
    A, B, G, H = plant.A, plant.B, plant.G, plant.H
    F = la.solve(np.eye(n) - A, B, "(I-A)", cond_max)
    Ainv = la.inv(A, "A", cond_max)
    xt, ut, pt = x.T, u.T, p.T
    ctl = 2 * xt @ H.T @ H @ F + 2 * xt @ H.T @ G + 2 * ut @ G.T @ G + 2 * ut @ G.T @ H @ F + pt @ F
    cos = pt + 2 * (xt @ H.T @ H + ut @ G.T @ H) @ Ainv
    return ctl.ravel(), cos.ravel()


def swap_plant() -> HinfPlant:
    """Two-state example: ``A = I`` and every other matrix the 2x2 swap."""
    J = np.array([[0.0, 1.0], [1.0, 0.0]])
    return HinfPlant(np.eye(2), J, J, J, J, J, J)
