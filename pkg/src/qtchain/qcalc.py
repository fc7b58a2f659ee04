"""q-calculus primitives at configurable precision.

Everything here works on mpmath numbers inside a precision context
(see :class:`Precision`).  Plain Python numbers and ``Fraction`` objects are
accepted wherever a real is expected and converted on entry.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import mpmath
from mpmath import mp, mpf
from mpmath.libmp import to_fixed

#: extra binary-decimal guard digits carried on top of the requested ones
GUARD_DIGITS = 10

#: environment variable holding the default number of significant digits
PRECISION_ENV = "QTCHAIN_DPS"


class ConvergenceError(ArithmeticError):
    """A series did not reach its truncation tolerance within the iteration cap."""


def _default_digits() -> int:
    raw = os.environ.get(PRECISION_ENV, "50")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Precision:
    """Working precision and truncation tolerance.

    ``sig_digits`` governs arithmetic; ``eps`` is the absolute tolerance used
    when truncating series (kernel rows, q-integrals).  When ``eps`` is not
    given it defaults to ``10**(-sig_digits // 2)``.
    """

    sig_digits: int = field(default_factory=_default_digits)
    eps: float | None = None

    def __post_init__(self):
        if int(self.sig_digits) != self.sig_digits or self.sig_digits < 15:
            raise ValueError("sig_digits must be an integer >= 15")
        if self.eps is None:
            object.__setattr__(self, "eps", 10.0 ** (-(self.sig_digits // 2)))
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @contextmanager
    def context(self) -> Iterator[None]:
        with mpmath.workdps(self.sig_digits + GUARD_DIGITS):
            yield

    @property
    def rel_tol(self):
        return mpf(10) ** (-self.sig_digits)


def to_mpf(x) -> mpf:
    """Convert ints, Fractions, decimal strings and floats to mpf exactly
    (up to the active precision)."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, (mpf, mpmath.mpc)):
        return x
    return mpf(x)


def to_fraction(x) -> Fraction:
    """Exact rational from a decimal string, int, float or Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, mpf):
        m, e = x.man_exp
        return Fraction(int(m)) * Fraction(2) ** int(e)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


@dataclass(frozen=True)
class QPair:
    """The deformation parameters (q, t), both in (0, 1), stored exactly.

    ``tau`` is set when t was built as an exact integer power of q.
    """

    q: Fraction
    t: Fraction
    tau: int | None = None

    def __post_init__(self):
        q, t = to_fraction(self.q), to_fraction(self.t)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", t)
        if not 0 < q < 1:
            raise ValueError(f"q must lie in (0,1), got {q}")
        if not 0 < t < 1:
            raise ValueError(f"t must lie in (0,1), got {t}")
        if self.tau is not None:
            if int(self.tau) != self.tau or self.tau < 1:
                raise ValueError("tau must be a positive integer")
            if q ** int(self.tau) != t:
                raise ValueError("t is not the declared power of q")

    @classmethod
    def from_tau(cls, q, tau: int) -> "QPair":
        qf = to_fraction(q)
        return cls(qf, qf ** int(tau), int(tau))

    def mp(self) -> tuple[mpf, mpf]:
        """(q, t) as mpf at the active precision."""
        return to_mpf(self.q), to_mpf(self.t)

    def floats(self) -> tuple[float, float]:
        return float(self.q), float(self.t)


def _check_q(q) -> mpf:
    q = to_mpf(q)
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0,1), got {q}")
    return q


def qpoch_finite(z, q, m: int):
    """(z; q)_m as an exact product of m factors."""
    q = _check_q(q)
    if m < 0:
        raise ValueError("m must be nonnegative")
    z = to_mpf(z)
    out = mpf(1)
    for _ in range(m):
        out *= 1 - z
        z *= q
    return out


def _terms_needed(absz: float, q: float, tol: float) -> int:
    # smallest M with |z| q^M <= 1/2 and 2 |z| q^M / (1-q) < tol
    target = min(0.5, tol * (1 - q) / 2)
    if absz <= target:
        return 0
    return max(0, math.ceil((math.log(absz) - math.log(target)) / -math.log(q))) + 1


def qpoch_infinite(z, q, prec: Precision | None = None):
    """(z; q)_infinity with relative error at most 10**(-sig_digits).

    Once |z| q^M <= 1/2 the remaining product satisfies
    |log prod_{n>=M}(1 - z q^n)| <= 2|z| q^M / (1-q), which fixes the number
    of factors in advance.  Real z is multiplied out in fixed-point integer
    arithmetic with guard bits; complex z uses mpmath directly.  A factor
    within a few ulps of zero is treated as an exact zero.
    """
    q = _check_q(q)
    z = to_mpf(z)
    if z == 0:
        return mpf(1)
    digits = prec.sig_digits if prec else mp.dps
    tol = 10.0 ** (-digits) / 4
    absz = float(abs(z))
    if not math.isfinite(absz):
        raise ConvergenceError("argument too large for qpoch_infinite")
    qf = float(q)
    M = _terms_needed(absz, qf, max(tol, 1e-300))
    if tol < 1e-300:
        # beyond double range: fall back to an explicit bound check
        M = _terms_needed(absz, qf, 1e-300) + math.ceil((-math.log10(tol) - 300) / -math.log10(qf)) + 1
    # exact zeros: z q^n = 1 for some 0 <= n < M
    if z.real > 0 if isinstance(z, mpmath.mpc) else z > 0:
        n0 = round(math.log(absz) / -math.log(qf))
        if 0 <= n0 <= M:
            one_gap = abs(z * q**n0 - 1)
            if one_gap < mpf(2) ** (8 - mp.prec):
                return mpf(0)
    if isinstance(z, mpmath.mpc):
        out = mpmath.mpc(1)
        zn = z
        for _ in range(M):
            out *= 1 - zn
            zn *= q
        return out
    bits = mp.prec + 24 + M.bit_length()
    one = 1 << bits
    zi = to_fixed(z._mpf_, bits)
    qi = to_fixed(q._mpf_, bits)
    acc = one
    shift = 0  # acc * 2^-(bits + shift) is the running product
    for _ in range(M):
        acc = (acc * (one - zi)) >> bits
        zi = (zi * qi) >> bits
        short = bits - acc.bit_length()
        if short > 32:  # renormalize so small products keep full precision
            acc <<= short
            shift += short
    if acc == 0:
        return mpf(0)
    return +mpf((acc, -bits - shift))


def gen_pochhammer(z, qp: QPair, nu: Sequence[int]):
    """(z; q, t)_nu: product over boxes (i, j) of 1 - z q^(j-1) t^(1-i)."""
    q, t = qp.mp()
    z = to_mpf(z)
    out = mpf(1)
    row = z
    for part in nu:
        w = row
        for _ in range(part):
            out *= 1 - w
            w *= q
        row /= t
    return out


def _one_sided(f: Callable, z, q, tol, cap: int):
    z = to_mpf(z)
    if z == 0:
        return mpf(0)
    total = mpf(0)
    w = z
    small = 0
    for _ in range(cap):
        term = f(w) * w
        total += term
        if abs(term) < tol:
            small += 1
            if small >= 3:
                return (1 - q) * total
        else:
            small = 0
        w *= q
    raise ConvergenceError("Jackson series terms failed to decay")


def qintegral(f: Callable, z_lo, z_hi, q, prec: Precision, cap: int = 200000):
    """Jackson integral of f from z_lo to z_hi on the q-geometric grids."""
    q = _check_q(q)
    tol = to_mpf(prec.eps) * (1 - q)
    return _one_sided(f, z_hi, q, tol, cap) - _one_sided(f, z_lo, q, tol, cap)


def norm_constants(N: int, qp: QPair, prec: Precision):
    """The pair (C_N, C~_N) with C~_N = (1-q)^(N-1) C_N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    q, t = qp.mp()
    tq = qpoch_infinite(t, q, prec)
    qq = qpoch_infinite(q, q, prec)
    ctilde = tq**N / (qpoch_infinite(t**N, q, prec) * qq ** (N - 1))
    return ctilde / (1 - q) ** (N - 1), ctilde
