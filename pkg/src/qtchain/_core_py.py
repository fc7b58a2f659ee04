"""Pure-Python double-precision backend (fallback for the compiled core)."""

from __future__ import annotations

from ._engine import row_engine

BACKEND = "python"


def poch_inf(z: float, q: float) -> float:
    """(z; q)_inf in double precision."""
    out = 1.0
    tol = 1e-18 * (1.0 - q)
    while abs(z) > tol:
        out *= 1.0 - z
        z *= q
    return out


def poch_ratio(a: float, b: float, q: float) -> float:
    """(a; q)_inf / (b; q)_inf as a single product of bounded factors."""
    out = 1.0
    tol = 1e-18 * (1.0 - q)
    while abs(a) > tol or abs(b) > tol:
        out *= (1.0 - a) / (1.0 - b)
        a *= q
        b *= q
    return out


def row_float(xs, k, ls, q, t, ctilde, budget, m_cap=None):
    """Kernel row in doubles; same contract as :func:`_engine.row_engine`."""
    return row_engine(
        [float(x) for x in xs], k, ls, float(q), float(t), float(ctilde),
        lambda z: poch_inf(z, q), float(budget), m_cap,
        poch_ratio=lambda a, b: poch_ratio(a, b, q),
    )
