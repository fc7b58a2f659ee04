"""Macdonald polynomials P_{nu|N}: evaluation by the branching rule, the
infinite-variable version on boundary configurations, and an independent
oracle built from the Macdonald difference operator."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import mpmath
from mpmath import mp, mpf

from .qcalc import QPair, qpoch_finite, to_mpf
from .shapes import Partition, branching_psi, dominates, interlacing_below, partitions

#: cap on the number of (shape, suffix) states visited by one evaluation
PATTERN_GUARD = 200000


class PatternGuardError(RuntimeError):
    pass


@dataclass(frozen=True)
class MacdonaldValue:
    value: mpf
    cert: mpf

    def __post_init__(self):
        if self.cert < 0:
            raise ValueError("certificate must be nonnegative")


class _Psi:
    """Per-call memo of branching coefficients."""

    def __init__(self, qp: QPair):
        self.qp = qp
        self.cache: dict = {}

    def __call__(self, lam, mu):
        key = (lam, mu)
        val = self.cache.get(key)
        if val is None:
            val = self.cache[key] = branching_psi(lam, mu, self.qp)
        return val


def eval(nu: Sequence[int], xs: Sequence, qp: QPair, guard: int = PATTERN_GUARD):
    """P_{nu|N}(xs) through P_lam = sum_{mu ≺ lam} psi x_N^{|lam|-|mu|} P_mu."""
    nu = Partition(nu)
    xs = [to_mpf(x) for x in xs]
    N = len(xs)
    if len(nu) > N:
        raise ValueError(f"l(nu) = {len(nu)} exceeds the number of variables {N}")
    psi = _Psi(qp)
    memo: dict = {}
    visits = [0]

    def rec(lam: Partition, n: int):
        if n == 0:
            return mpf(1) if not lam else mpf(0)
        key = (lam, n)
        if key in memo:
            return memo[key]
        visits[0] += 1
        if visits[0] > guard:
            raise PatternGuardError("branching recursion exceeded the pattern guard")
        xn = xs[n - 1]
        size = lam.size
        total = mpf(0)
        for mu in interlacing_below(lam, n):
            sub = rec(mu, n - 1)
            if sub:
                total += psi(lam, mu) * xn ** (size - mu.size) * sub
        memo[key] = total
        return total

    return rec(nu, N)


def eval_config(nu: Sequence[int], X, qp: QPair | None = None):
    """P_{nu|N} on the real values of a configuration."""
    qp = qp or X.params.qp
    return eval(nu, X.values(), qp)


def monomial_table(nu: Sequence[int], N: int, qp: QPair) -> dict[tuple[int, ...], mpf]:
    """Coefficients of P_{nu|N} on monomials x^alpha, from the branching rule."""
    nu = Partition(nu)
    if len(nu) > N:
        return {}
    psi = _Psi(qp)
    memo: dict = {}

    def rec(lam: Partition, n: int) -> dict:
        if n == 0:
            return {(): mpf(1)} if not lam else {}
        key = (lam, n)
        if key in memo:
            return memo[key]
        out: dict = {}
        for mu in interlacing_below(lam, n):
            sub = rec(mu, n - 1)
            if not sub:
                continue
            c = psi(lam, mu)
            e = lam.size - mu.size
            for alpha, v in sub.items():
                key2 = alpha + (e,)
                out[key2] = out.get(key2, 0) + c * v
        memo[key] = out
        return out

    return rec(nu, N)


class MacdonaldBank:
    """Evaluate many P_{nu|N} at the same points, sharing powers."""

    def __init__(self, nus: Sequence[Sequence[int]], N: int, qp: QPair):
        self.nus = [Partition(nu) for nu in nus]
        self.N = N
        self.tables = [list(monomial_table(nu, N, qp).items()) for nu in self.nus]
        self.top = max((nu.size for nu in self.nus), default=0)

    def values(self, xs: Sequence) -> list:
        xs = list(xs)
        if len(xs) != self.N:
            raise ValueError("wrong number of variables")
        powers = []
        for x in xs:
            row = [mpf(1)]
            for _ in range(self.top):
                row.append(row[-1] * x)
            powers.append(row)
        out = []
        for table in self.tables:
            total = mpf(0)
            for alpha, c in table:
                term = c
                for i, e in enumerate(alpha):
                    if e:
                        term *= powers[i][e]
                total += term
            out.append(total)
        return out


def eval_infinite(nu: Sequence[int], X, qp: QPair | None = None, finer: int = 2) -> MacdonaldValue:
    """P_nu on an infinite configuration.

    Evaluates on the points with |x| >= delta and on the points with
    |x| >= delta**finer.  Monomial coefficients are nonnegative for q, t in
    (0,1), so P_nu(|X_n|) increases with n and bounds the truncation error
    of the signed evaluation; the increment between the two levels is
    reported as the certificate.
    """
    from .lattice import Configuration

    nu = Partition(nu)
    if isinstance(X, Configuration):
        return MacdonaldValue(eval_config(nu, X, qp) if len(nu) <= X.level else mpf(0), mpf(0))
    qp = qp or X.params.qp
    if not nu:
        return MacdonaldValue(mpf(1), mpf(0))
    coarse = X.truncated()
    fine = X.truncated(to_mpf(X.delta) ** finer)

    def on(config, absolute):
        vals = config.values()
        if absolute:
            vals = [abs(v) for v in vals]
        if len(nu) > len(vals):
            return mpf(0)
        return eval(nu, vals, qp)

    value = on(fine, False)
    if coarse.dsig == fine.dsig:
        return MacdonaldValue(value, mpf(0))
    cert = on(fine, True) - on(coarse, True)
    return MacdonaldValue(value, abs(cert))


def principal_spec(nu: Sequence[int], N: int, qp: QPair):
    """P_{nu|N}(1, t, ..., t^{N-1})."""
    _, t = qp.mp()
    return eval(nu, [t**i for i in range(N)], qp)


def one_row_Q(n: int, z, qp: QPair):
    """Q_(n)(z) = (t;q)_n / (q;q)_n z^n."""
    q, t = qp.mp()
    return qpoch_finite(t, q, n) / qpoch_finite(q, q, n) * to_mpf(z) ** n


# ---------------------------------------------------------------------------
# independent oracle


def monomial_symmetric(mu: Sequence[int], xs: Sequence) -> mpf:
    """m_mu(xs): sum over distinct rearrangements of mu padded with zeros."""
    N = len(xs)
    if len(mu) > N:
        return mpf(0)
    padded = tuple(mu) + (0,) * (N - len(mu))
    total = mpf(0)
    for alpha in set(itertools.permutations(padded)):
        term = mpf(1)
        for x, e in zip(xs, alpha):
            if e:
                term *= x**e
        total += term
    return total


def macdonald_operator(f, xs: Sequence, qp: QPair):
    """(D f)(xs) = sum_i prod_{j != i} (t x_i - x_j)/(x_i - x_j) f(.., q x_i, ..)."""
    q, t = qp.mp()
    xs = [to_mpf(x) for x in xs]
    total = mpf(0)
    for i, xi in enumerate(xs):
        coef = mpf(1)
        for j, xj in enumerate(xs):
            if j != i:
                coef *= (t * xi - xj) / (xi - xj)
        shifted = list(xs)
        shifted[i] = q * xi
        total += coef * f(shifted)
    return total


def eigenvalue(nu: Sequence[int], N: int, qp: QPair):
    q, t = qp.mp()
    padded = tuple(nu) + (0,) * (N - len(nu))
    return sum(q**a * t ** (N - 1 - i) for i, a in enumerate(padded))


@dataclass(frozen=True)
class OracleTable:
    nu: Partition
    N: int
    coeffs: dict

    def evaluate(self, xs: Sequence) -> mpf:
        return sum((c * monomial_symmetric(mu, xs) for mu, c in self.coeffs.items()), mpf(0))


def macdonald_oracle(nu: Sequence[int], N: int, qp: QPair, extra_digits: int = 40) -> OracleTable:
    """Monomial expansion of P_{nu|N} as the unitriangular eigenvector of D.

    The matrix of D on monomial symmetric functions is recovered by
    evaluating D m_kappa at sample points and solving for the monomial
    coordinates; no branching coefficient is used.
    """
    nu = Partition(nu)
    if nu.size > 6 or N > 4:
        raise ValueError("oracle restricted to |nu| <= 6 and N <= 4")
    if len(nu) > N:
        raise ValueError("l(nu) exceeds N")
    basis = partitions(nu.size, N)
    if not basis:
        return OracleTable(nu, N, {})
    with mpmath.workdps(mp.dps + extra_digits):
        # deterministic, well separated sample points
        pts = []
        for s in range(len(basis)):
            pts.append([mpf(1) + mpf(i + 1) / 3 + mpf(s) / (7 * (i + 2)) + mpf(s * s) / 97 for i in range(N)])
        B = mpmath.matrix([[monomial_symmetric(mu, p) for mu in basis] for p in pts])
        dmat = {}
        for kappa in basis:
            rhs = mpmath.matrix([macdonald_operator(lambda ys: monomial_symmetric(kappa, ys), p, qp) for p in pts])
            sol = mpmath.lu_solve(B, rhs)
            for idx, mu in enumerate(basis):
                dmat[(kappa, mu)] = sol[idx]
        e_nu = eigenvalue(nu, N, qp)
        coeffs = {}
        start = basis.index(nu)
        for pos in range(start, len(basis)):
            mu = basis[pos]
            if mu == nu:
                coeffs[mu] = mpf(1)
                continue
            if not dominates(nu, mu):
                continue
            acc = sum((coeffs[kap] * dmat[(kap, mu)] for kap in coeffs), mpf(0))
            coeffs[mu] = acc / (e_nu - eigenvalue(mu, N, qp))
    return OracleTable(nu, N, {mu: +c for mu, c in coeffs.items()})


def schur_bialternant(nu: Sequence[int], xs: Sequence) -> mpf:
    """s_nu(xs) = det(x_i^{nu_j + N - j}) / det(x_i^{N - j})."""
    xs = [to_mpf(x) for x in xs]
    N = len(xs)
    padded = tuple(nu) + (0,) * (N - len(nu))
    num = mpmath.matrix([[x ** (padded[j] + N - 1 - j) for j in range(N)] for x in xs])
    den = mpmath.matrix([[x ** (N - 1 - j) for j in range(N)] for x in xs])
    return mpmath.det(num) / mpmath.det(den)
