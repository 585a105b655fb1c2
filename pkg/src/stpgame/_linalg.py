import numpy as np

from .errors import DimensionError, SingularFactorError

COND_MAX = 1e12


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float array (vectors become columns)."""
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if m.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} has non-finite entries")
    return m


def frozen(a, name="matrix"):
    m = as_matrix(a, name)
    m.flags.writeable = False
    return m


def check_cond(m, factor, cond_max=COND_MAX):
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{factor} must be square, got {m.shape}")
    c = np.linalg.cond(m)
    if not np.isfinite(c) or c > cond_max:
        raise SingularFactorError(factor, f"{factor} singular (condition number {c:.3e})")


def inv(m, factor, cond_max=COND_MAX):
    check_cond(m, factor, cond_max)
    return np.linalg.inv(m)


def solve(m, rhs, factor, cond_max=COND_MAX):
    check_cond(m, factor, cond_max)
    return np.linalg.solve(m, rhs)


def max_abs(a):
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0
