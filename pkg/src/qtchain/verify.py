"""Identity checks with residuals and tolerances, and a small manifest
format for running a suite of them."""

from __future__ import annotations

import configparser
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Sequence

import mpmath
import numpy as np
from mpmath import mpf

from . import chain
from .kernels import (
    dixon_anderson,
    extended_kernel_row,
    kernel_compose,
    kernel_general,
    kernel_row,
    kernel_special,
    kernel_tau_one,
    vandermonde,
)
from .lattice import (
    PLUS,
    Configuration,
    InfiniteConfiguration,
    Params,
    _dec,
)
from .macdonald import MacdonaldBank, eval as mac_eval, eval_config, eval_infinite
from .qcalc import Precision, QPair, norm_constants, qpoch_infinite, to_mpf
from .shapes import (
    DoubleSignature,
    InfiniteDoubleSignature,
    Partition,
    SideSequence,
    Signature,
    branching_psi,
)

IDENTITY_TOL = 1e-8


@dataclass
class CheckReport:
    name: str
    inputs: dict
    residual: object
    tolerance: float
    passed: bool
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "residual": _text(self.residual),
            "tolerance": _text(self.tolerance),
            "passed": self.passed,
            "runtime": round(self.runtime, 6),
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _text(x) -> str:
    if isinstance(x, (mpf, mpmath.mpc)):
        return mpmath.nstr(x, 17)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _jsonable(v):
    if isinstance(v, (mpf, float, mpmath.mpc)):
        return _text(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _report(name, inputs, residual, tol, started, **details) -> CheckReport:
    residual_f = float(residual)
    passed = bool(residual_f <= tol)
    return CheckReport(name, inputs, residual, tol, passed, time.perf_counter() - started, details)


def _cfg(X: Configuration) -> dict:
    return X.to_json(with_values=False)


# ---------------------------------------------------------------------------
# kernels


def check_stochastic(X: Configuration, p: Params | None = None, prec: Precision | None = None, m_max: int | None = None, tol: float = IDENTITY_TOL) -> CheckReport:
    """|sum of enumerated weights + certified tail - 1|."""
    started = time.perf_counter()
    prec = prec or Precision()
    row = kernel_row(X, p, prec, m_max=m_max)
    with prec.context():
        residual = abs(row.total() + row.tail_bound - 1)
    return _report("stochastic", {"X": _cfg(X), "m_max": m_max}, residual, tol, started,
                   atoms=len(row.atoms), tail_bound=row.tail_bound)


def check_coherency(X: Configuration, nu, p: Params | None = None, prec: Precision | None = None, tau: int | None = None, tol: float = IDENTITY_TOL) -> CheckReport:
    """Moment of the row against P_{nu|N}(X)/(t^N;q,t)_nu.

    With ``tau`` the weights are recomputed one by one from the special
    formula (the tail still comes from the general row)."""
    started = time.perf_counter()
    prec = prec or Precision()
    nu = Partition(nu)
    N = X.level
    row = kernel_row(X, p, prec)
    if tau is not None:
        from .kernels import KernelRow

        row = KernelRow(X, tuple((Y, kernel_special(X, Y, tau, prec=prec)) for Y, _ in row.atoms), row.tail_bound)
    m = chain.moment(row, nu, prec=prec, level=N - 1)
    with prec.context():
        rhs = eval_config(nu, X) / chain.normalizer(nu, N, X.params.qp)
        residual = abs(m.value - rhs)
    return _report("coherency", {"X": _cfg(X), "nu": list(nu), "tau": tau}, residual, tol + float(m.band), started,
                   lhs=m.value, rhs=rhs, band=m.band)


def check_special_general(X: Configuration, tau: int, prec: Precision | None = None, tol: float = 1e-40, m_max: int | None = None) -> CheckReport:
    """Max |kernel_special - kernel_general| over the enumerated row (to
    straddle depth ``m_max`` if given); at tau = 1 the closed form is
    compared as well."""
    started = time.perf_counter()
    prec = prec or Precision()
    row = kernel_row(X, prec=prec, m_max=m_max)
    worst = mpf(0)
    with prec.context():
        for Y, w in row.atoms:
            s = kernel_special(X, Y, tau, prec=prec)
            g = kernel_general(X, Y, prec=prec)
            worst = max(worst, abs(s - g), abs(s - w))
            if tau == 1:
                worst = max(worst, abs(kernel_tau_one(X, Y, prec) - g))
    return _report("special_general", {"X": _cfg(X), "tau": tau, "m_max": m_max}, worst, tol, started, atoms=len(row.atoms))


def check_extended(Xs: Configuration, N: int, A_list: Sequence[int] = (20, 40), prec: Precision | None = None, tol: float = 1e-6) -> CheckReport:
    """Mass on atoms outside Y* ≺≺ X* at each A: the last must be below tol
    and the sequence must decrease (a non-decrease reports residual inf)."""
    started = time.perf_counter()
    prec = prec or Precision()
    masses, totals = [], []
    for A in A_list:
        r = extended_kernel_row(Xs, N, A, prec=prec)
        with prec.context():
            masses.append(r.violating_mass())
            totals.append(abs(r.total() + r.tail_bound - 1))
    decreasing = all(b < a or (a == 0 and b == 0) for a, b in zip(masses, masses[1:]))
    residual = masses[-1] if decreasing else mpf("inf")
    return _report("extended", {"X": _cfg(Xs), "N": N, "A": list(A_list)}, residual, tol, started,
                   violating_mass=masses, row_sum_error=totals)


# ---------------------------------------------------------------------------
# Macdonald identities


def _generic(Z, q, t, margin=1e-4, span=60) -> bool:
    for i, zi in enumerate(Z):
        for j, zj in enumerate(Z):
            if i == j:
                continue
            r = zi / zj
            for n in range(-span, span + 1):
                if abs(r - q**n) < margin or abs(r - t * q**n) < margin:
                    return False
    return True


def generic_points(rng: np.random.Generator, N: int, qp: QPair, lo: float = -3.0, hi: float = 3.0, margin: float = 1e-4) -> list[Fraction]:
    """Random real points, redrawn until all ratios avoid q^n and t q^n."""
    q, t = qp.floats()
    while True:
        Z = [Fraction(round(float(rng.uniform(lo, hi)), 6)) for _ in range(N)]
        if any(z == 0 for z in Z) or len(set(Z)) < N:
            continue
        if _generic([float(z) for z in Z], q, t, margin):
            return Z


def okounkov_series(Z: Sequence, nus: Sequence, qp: QPair, prec: Precision | None = None, tol: float = 1e-18) -> list:
    """Left side of the q-integral formula as the double-indexed series over
    binary words and m in Z_{>=0}^{N-1}, for several nu at once.

    Every coordinate of m runs to the same M, where q^M (1+max|z|)^{|nu|+1}
    is below ``tol``; the per-index ratio of R from m to m + 1 is
    prod_s (1 - z q^m t / z_s) / (1 - z q^{m+1} / z_s).
    """
    prec = prec or Precision()
    nus = [Partition(nu) for nu in nus]
    with prec.context():
        q, t = qp.mp()
        Z = [to_mpf(z) for z in Z]
        N = len(Z)
        deg = max((nu.size for nu in nus), default=0)
        big = max(abs(z) for z in Z)
        M = int(math.ceil(math.log(tol / (1 + float(big)) ** (deg + 1)) / math.log(float(q)))) + 1
        bank = MacdonaldBank(nus, N - 1, qp)
        norms = [chain.normalizer(nu, N - 1, qp) for nu in nus]
        _, ct = norm_constants(N, qp, prec)
        base = mpf(1)
        for i in range(N):
            for j in range(N):
                if i != j:
                    base *= qpoch_infinite(Z[i] * t / Z[j], q, prec) / qpoch_infinite(Z[i] * q / Z[j], q, prec)
        sums = [mpf(0)] * len(nus)
        for word in itertools.product((0, 1), repeat=N - 1):
            ps = [r + e for r, e in enumerate(word)]  # zero-based point index
            r0 = base
            for pidx in ps:
                for s in range(N):
                    r0 *= qpoch_infinite(Z[pidx] * q / Z[s], q, prec) / qpoch_infinite(Z[pidx] * t / Z[s], q, prec)
            # per-index cumulative ratios
            gains = []
            for pidx in ps:
                g = [mpf(1)]
                for m in range(M):
                    u = Z[pidx] * q**m
                    val = g[-1]
                    for s in range(N):
                        val *= (1 - u * t / Z[s]) / (1 - u * q / Z[s])
                    g.append(val)
                gains.append(g)
            sign = (-1) ** sum(word)
            for ms in itertools.product(range(M + 1), repeat=N - 1):
                zt = [Z[pidx] * q**m for pidx, m in zip(ps, ms)]
                v = vandermonde(zt)
                if v == 0:
                    continue
                w = sign * r0 * v * mpmath.fprod(zt)
                for r, m in enumerate(ms):
                    w *= gains[r][m]
                vals = bank.values(zt)
                sums = [s + w * x for s, x in zip(sums, vals)]
        vz = vandermonde(Z)
        return [+(ct / vz * s / n) for s, n in zip(sums, norms)]


def check_okounkov(Z: Sequence, nu, qp: QPair, prec: Precision | None = None, tol: float = 1e-10) -> CheckReport:
    started = time.perf_counter()
    prec = prec or Precision()
    nu = Partition(nu)
    N = len(Z)
    with prec.context():
        q, t = qp.mp()
        if not _generic([to_mpf(z) for z in Z], q, t):
            raise ValueError("Z is too close to a resonance")
        lhs = okounkov_series(Z, [nu], qp, prec)[0]
        rhs = mac_eval(nu, Z, qp) / chain.normalizer(nu, N, qp)
        residual = abs(lhs - rhs) / max(mpf(1), abs(rhs))
    return _report("okounkov", {"Z": [_dec(Fraction(z)) for z in Z], "nu": list(nu), "q": _dec(qp.q), "t": _dec(qp.t)},
                   residual, tol, started, lhs=lhs, rhs=rhs)


def okounkov_reports(Z: Sequence, nus: Sequence, qp: QPair, prec: Precision | None = None, tol: float = 1e-10) -> list[CheckReport]:
    """check_okounkov for several nu sharing one series evaluation."""
    started = time.perf_counter()
    prec = prec or Precision()
    nus = [Partition(nu) for nu in nus]
    N = len(Z)
    with prec.context():
        q, t = qp.mp()
        if not _generic([to_mpf(z) for z in Z], q, t):
            raise ValueError("Z is too close to a resonance")
        lhs = okounkov_series(Z, nus, qp, prec)
        out = []
        for nu, left in zip(nus, lhs):
            rhs = mac_eval(nu, Z, qp) / chain.normalizer(nu, N, qp) if len(nu) <= N else mpf(0)
            residual = abs(left - rhs) / max(mpf(1), abs(rhs))
            out.append(_report("okounkov", {"Z": [_dec(Fraction(z)) for z in Z], "nu": list(nu), "q": _dec(qp.q), "t": _dec(qp.t)},
                               residual, tol, started, lhs=left, rhs=rhs))
    return out


def laurent_eval(a: Sequence[int], xs: Sequence, qp: QPair):
    """P_a for a signature a, through P_{a+c} = (prod x)^c P_a."""
    shift = max(0, -min(a, default=0))
    lam = Partition([x + shift for x in a])
    return mac_eval(lam, xs, qp) / mpmath.fprod(xs) ** shift


def branching_coefficient(a: Sequence[int], b: Sequence[int], qp: QPair):
    """The stochastic coefficient L(a, b) of the Macdonald chain:
    psi_{a/b} t^{|b|} P_b(1, .., t^{N-2}) / P_a(1, .., t^{N-1})."""
    _, t = qp.mp()
    N = len(a)
    psi = branching_psi(a, b, qp)
    pa = laurent_eval(a, [t**i for i in range(N)], qp)
    pb = laurent_eval(b, [t**i for i in range(N - 1)], qp)
    return psi * t ** sum(b) * pb / pa


def _signatures_below(a: Sequence[int]):
    ranges = [range(a[i + 1], a[i] + 1) for i in range(len(a) - 1)]
    for b in itertools.product(*ranges):
        yield Signature(b)


def check_branching_link(a: Sequence[int], nu, p: Params, prec: Precision | None = None, tol: float = IDENTITY_TOL) -> CheckReport:
    """The branching coefficients with the involution a -> a* satisfy the
    coherency relation on one-sided configurations, and coincide with the
    general kernel on that block.  Needs zeta_plus = 1."""
    started = time.perf_counter()
    prec = prec or Precision()
    if p.zeta_plus != 1:
        raise ValueError("the block identity is stated for zeta_plus = 1")
    a = Signature(a)
    nu = Partition(nu)
    N = len(a)
    star = lambda s: Signature(-x for x in reversed(s))
    qp = p.qp
    with prec.context():
        X = Configuration(p, DoubleSignature(a, Signature()))
        lhs = mpf(0)
        total = mpf(0)
        block = mpf(0)
        for b in _signatures_below(a):
            L = branching_coefficient(star(a), star(b), qp)
            Y = Configuration(p, DoubleSignature(b, Signature()))
            total += L
            if len(nu) <= N - 1:
                lhs += L * eval_config(nu, Y) / chain.normalizer(nu, N - 1, qp)
            block = max(block, abs(L - kernel_general(X, Y, prec=prec)))
        rhs = eval_config(nu, X) / chain.normalizer(nu, N, qp)
        residual = max(abs(lhs - rhs), abs(total - 1), block)
    return _report("branching_link", {"a": list(a), "nu": list(nu), "params": p.to_json()}, residual, tol, started,
                   coherency=abs(lhs - rhs), row_sum=abs(total - 1), block=block)


def check_symmetry(lam, mu, N: int, qp: QPair, prec: Precision | None = None, tol: float = IDENTITY_TOL) -> CheckReport:
    """P_mu(q^lam t^delta)/P_mu(t^delta) = P_lam(q^mu t^delta)/P_lam(t^delta)."""
    started = time.perf_counter()
    prec = prec or Precision()
    lam, mu = Partition(lam), Partition(mu)
    with prec.context():
        q, t = qp.mp()
        delta = [t ** (N - 1 - i) for i in range(N)]
        at = lambda nu: [q**x * d for x, d in zip(nu.padded(N), delta)]
        left = mac_eval(mu, at(lam), qp) / mac_eval(mu, delta, qp)
        right = mac_eval(lam, at(mu), qp) / mac_eval(lam, delta, qp)
        residual = abs(left - right)
    return _report("symmetry", {"lam": list(lam), "mu": list(mu), "N": N}, residual, tol, started, left=left, right=right)


# ---------------------------------------------------------------------------
# atom bound and generating function


def extreme_point(X: Configuration):
    """(side, coordinate) of the point of largest absolute value."""
    vals = X.values()
    pts = X.points
    i = max(range(len(vals)), key=lambda j: (abs(vals[j]), vals[j]))
    return pts[i], vals[i]


def atom_bound_constant(qp: QPair, prec: Precision | None = None):
    """prod_m (t^m;q)_inf / ((-1;q)_inf prod_m (-t^m;q)_inf), m >= 1."""
    prec = prec or Precision()
    with prec.context():
        q, t = qp.mp()
        num = den = mpf(1)
        m = 1
        while True:
            tm = t**m
            a = qpoch_infinite(tm, q, prec)
            b = qpoch_infinite(-tm, q, prec)
            num *= a
            den *= b
            # log of the remaining factors is at most 2 t^m/((1-t)(1-q)) per side
            if 2 * tm / ((1 - t) * (1 - q)) < mpmath.eps * 10:
                break
            m += 1
        return +(num / (qpoch_infinite(-1, q, prec) * den))


def atom_closed_form(X: Configuration, prec: Precision | None = None):
    """(t;q)_inf/(t^N;q)_inf prod_{x != x0} (x t/x0;q)_inf/(x/x0;q)_inf."""
    prec = prec or Precision()
    with prec.context():
        q, t = X.params.qp.mp()
        pt0, x0 = extreme_point(X)
        out = qpoch_infinite(t, q, prec) / qpoch_infinite(t**X.level, q, prec)
        for pt, x in zip(X.points, X.values()):
            if pt == pt0:
                continue
            out *= qpoch_infinite(x * t / x0, q, prec) / qpoch_infinite(x / x0, q, prec)
        return +out


def atom_mass(X: Configuration, prec: Precision | None = None):
    """Lambda^N_1(X, {x0}) by composition restricted to configurations that
    keep x0; every path to {x0} must keep it, so the restriction is exact."""
    prec = prec or Precision()
    pt0, _ = extreme_point(X)

    def keeps(Y: Configuration) -> bool:
        seq = Y.dsig.plus if pt0.side == PLUS else Y.dsig.minus
        return len(seq) > 0 and seq[0] == pt0.coord

    row = kernel_compose(X, 1, prec=prec, keep=keeps)
    target = DoubleSignature(Signature([pt0.coord]), Signature()) if pt0.side == PLUS else DoubleSignature(Signature(), Signature([pt0.coord]))
    return row.as_dict().get(target, mpf(0)), row


def check_atom_bound(X: Configuration, p: Params | None = None, prec: Precision | None = None, tol: float = IDENTITY_TOL) -> CheckReport:
    """Composed atom at x0 against its closed form, and against the
    universal lower bound (a shortfall below the bound counts as residual)."""
    started = time.perf_counter()
    prec = prec or Precision()
    mass, _ = atom_mass(X, prec)
    closed = atom_closed_form(X, prec)
    c = atom_bound_constant(X.params.qp, prec)
    with prec.context():
        residual = max(abs(mass - closed), max(mpf(0), c - mass))
    return _report("atom_bound", {"X": _cfg(X)}, residual, tol, started, composed=mass, closed_form=closed, lower_bound=c)


def check_generating_function(X: Configuration, zs: Sequence, prec: Precision | None = None, tol: float = IDENTITY_TOL) -> CheckReport:
    """sum_y Lambda^N_1(X,y) (y t^N/z;q)_inf/(y/z;q)_inf against
    prod_x (x t/z;q)_inf/(x/z;q)_inf at complex z."""
    started = time.perf_counter()
    prec = prec or Precision()
    N = X.level
    row = kernel_compose(X, 1, prec=prec)
    worst = mpf(0)
    with prec.context():
        q, t = X.params.qp.mp()
        xs = X.values()
        for z in zs:
            z = mpmath.mpc(z)
            lhs = mpmath.mpc(0)
            for Y, w in row.atoms:
                y = Y.values()[0]
                lhs += w * qpoch_infinite(y * t**N / z, q, prec) / qpoch_infinite(y / z, q, prec)
            rhs = mpmath.mpc(1)
            for x in xs:
                rhs *= qpoch_infinite(x * t / z, q, prec) / qpoch_infinite(x / z, q, prec)
            # unenumerated atoms: |summand| is bounded by the largest one seen
            worst = max(worst, abs(lhs - rhs) / max(1, abs(rhs)))
    return _report("generating_function", {"X": _cfg(X), "z": [str(z) for z in zs]}, worst, tol + float(row.tail_bound), started,
                   deficit=row.tail_bound)


# ---------------------------------------------------------------------------
# q -> 1


def lattice_approximation(XX: Sequence, q, tau: int) -> Configuration:
    """A configuration at t = q^tau whose points tend to XX as q -> 1:
    the outermost point on each side fixes zeta, the others are rounded to
    the nearest admissible lattice point."""
    XX = sorted((Fraction(x) for x in XX), reverse=True)
    pos = [x for x in XX if x > 0]
    neg = sorted((x for x in XX if x < 0))
    if len(pos) + len(neg) != len(XX):
        raise ValueError("points must be nonzero")
    zp = pos[0] if pos else Fraction(1)
    zm = neg[0] if neg else Fraction(-1)
    p = Params.make(q, tau=tau, zeta_plus=zp, zeta_minus=zm)
    qf = float(p.qp.q)
    tf = float(p.qp.t)

    def coords(side_pts, z):
        out = []
        for i, x in enumerate(side_pts):
            # x = z q^{-a} t^i
            a = round(math.log(float(x / z) / tf**i) / -math.log(qf))
            if out:
                a = min(a, out[-1])
            out.append(a)
        return out

    dsig = DoubleSignature(Signature(coords(pos, zp)), Signature(coords(neg, zm)))
    return Configuration(p, dsig)


def cell_masses_lattice(X: Configuration, edges: Sequence[Sequence[float]], prec: Precision):
    """Kernel mass of each product cell [e_0, e_1) x ... over the N-1 gaps."""
    row = kernel_row(X, prec=prec)
    masses = {}
    with prec.context():
        for Y, w in row.atoms:
            ys = [float(v) for v in Y.values()]
            idx = []
            for y, e in zip(ys, edges):
                j = int(np.searchsorted(e, y, side="right")) - 1
                if j < 0 or j >= len(e) - 1:
                    idx = None
                    break
                idx.append(j)
            if idx is not None:
                masses[tuple(idx)] = masses.get(tuple(idx), 0) + float(w)
    return masses


def cell_masses_continuum(XX: Sequence[float], edges: Sequence[Sequence[float]], tau):
    out = {}
    N = len(XX)
    for idx in itertools.product(*(range(len(e) - 1) for e in edges)):
        box = [(edges[r][j], edges[r][j + 1]) for r, j in enumerate(idx)]
        if N == 2:
            val = mpmath.quad(lambda y: dixon_anderson(XX, [y], tau), box[0])
        else:
            val = mpmath.quad(lambda *ys: dixon_anderson(XX, list(ys), tau), *box)
        out[idx] = float(val)
    return out


def check_q1_degeneration(tau: int, shape: Sequence = (1, -1), q_list: Sequence = ("0.9", "0.95", "0.99"), cells: int = 4, prec: Precision | None = None, tol: float = 0.05) -> CheckReport:
    """Cell masses of the lattice kernel against the Dixon-Anderson
    integrals.  The residual is the max cell error at the last q; it is
    reported as inf if the error does not decrease along q_list."""
    started = time.perf_counter()
    prec = prec or Precision(30, eps=1e-12)
    XX = sorted((float(Fraction(x)) for x in shape), reverse=True)
    edges = [list(np.linspace(XX[i + 1], XX[i], cells + 1)) for i in range(len(XX) - 1)]
    with mpmath.workdps(20):
        cont = cell_masses_continuum(XX, edges, tau)
    errors = []
    for qs in q_list:
        X = lattice_approximation(shape, Fraction(qs), tau)
        lat = cell_masses_lattice(X, edges, prec)
        errors.append(max(abs(lat.get(k, 0.0) - v) for k, v in cont.items()))
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    residual = errors[-1] if monotone else float("inf")
    return _report("q1_degeneration", {"tau": tau, "shape": [_dec(Fraction(s)) for s in shape], "q": [_dec(Fraction(s)) for s in q_list], "cells": cells},
                   residual, tol, started, errors=errors)


# ---------------------------------------------------------------------------
# boundary


def check_theoremC(
    Xinf: InfiniteConfiguration,
    nus: Sequence,
    K: int,
    N_list: Sequence[int],
    p: Params | None = None,
    prec: Precision | None = None,
    prune: float = 0.0,
    tol: float = IDENTITY_TOL,
    engine: str = "mp",
) -> CheckReport:
    """Moments of Lambda^N_K(X(N), .) along N_list.

    For each nu the drift |m(N_{i+1}) - m(N_i)| must strictly decrease,
    unless both drifts are already below ``tol`` (converged to working
    accuracy).  nu = empty is exact: its moment must be 1 within the
    deficit.  Each moment must also equal P_{nu|N}(X(N))/(t^N;q,t)_nu within
    its band.  The residual is the largest violation of either requirement.
    """
    started = time.perf_counter()
    prec = prec or Precision()
    nus = [Partition(nu) for nu in nus]
    table = {nu: [] for nu in nus}
    coherence = mpf(0)
    slack = tol if engine == "mp" else max(tol, 1e-10)
    for N in N_list:
        row = chain.boundary_row(Xinf, K, N, p, prec, prune, engine)
        ms = chain.moments(row, nus, prec=prec)
        with prec.context():
            X = Xinf.prefix(N)
            for nu, m in zip(nus, ms):
                table[nu].append(m)
                rhs = eval_config(nu, X) / chain.normalizer(nu, N, Xinf.params.qp) if len(nu) <= N else mpf(0)
                coherence = max(coherence, abs(m.value - rhs) - m.band - slack + tol)
    violation = mpf(0)
    drifts = {}
    limits = {}
    with prec.context():
        for nu in nus:
            vals = table[nu]
            d = [abs(b.value - a.value) for a, b in zip(vals, vals[1:])]
            drifts[str(tuple(nu))] = d
            if not nu:
                violation = max(violation, *(abs(v.value - 1) - v.band for v in vals))
                continue
            for a, b in zip(d, d[1:]):
                if not b < a and max(a, b) > tol:
                    violation = max(violation, b - a + tol)
            limits[str(tuple(nu))] = eval_infinite(nu, Xinf).value
    residual = max(violation, coherence, mpf(0))
    return _report("theoremC", {"K": K, "N_list": list(N_list), "nus": [list(nu) for nu in nus], "engine": engine}, residual, tol, started,
                   drifts=drifts, limits=limits, moments={str(tuple(nu)): [m.value for m in v] for nu, v in table.items()})


# ---------------------------------------------------------------------------
# manifest


def _ints(text: str) -> list[int]:
    text = text.strip()
    return [int(x) for x in text.split(",")] if text else []


def _params(sec) -> Params:
    q = sec.get("q", "0.5")
    zp = sec.get("zeta_plus", "1")
    zm = sec.get("zeta_minus", "-1")
    if "tau" in sec:
        return Params.make(q, tau=int(sec["tau"]), zeta_plus=zp, zeta_minus=zm)
    return Params.make(q, sec.get("t", "0.5"), zeta_plus=zp, zeta_minus=zm)


def _config(sec) -> Configuration:
    return Configuration(_params(sec), DoubleSignature(Signature(_ints(sec.get("plus", ""))), Signature(_ints(sec.get("minus", "")))))


def _side(text: str | None) -> SideSequence:
    if not text:
        return SideSequence()
    parts = text.split(";")
    prefix = tuple(_ints(parts[0]))
    rule = parts[1].strip() if len(parts) > 1 else "finite"
    step = int(parts[2]) if len(parts) > 2 else 0
    return SideSequence(prefix, rule, step)


def _runner(kind: str) -> Callable:
    def stochastic(sec, prec):
        m_max = int(sec["m_max"]) if "m_max" in sec else None
        return check_stochastic(_config(sec), prec=prec, m_max=m_max)

    def coherency(sec, prec):
        tau = int(sec["special"]) if "special" in sec else None
        return check_coherency(_config(sec), _ints(sec.get("nu", "")), prec=prec, tau=tau)

    def special_general(sec, prec):
        return check_special_general(_config(sec), int(sec["tau"]), prec)

    def extended(sec, prec):
        return check_extended(_config(sec), int(sec["N"]), _ints(sec.get("A", "20,40")), prec)

    def okounkov(sec, prec):
        Z = [Fraction(z) for z in sec["Z"].split(",")]
        qp = _params(sec).qp
        return check_okounkov(Z, _ints(sec.get("nu", "")), qp, prec)

    def branching_link(sec, prec):
        return check_branching_link(_ints(sec["a"]), _ints(sec.get("nu", "")), _params(sec), prec)

    def symmetry(sec, prec):
        return check_symmetry(_ints(sec.get("lam", "")), _ints(sec.get("mu", "")), int(sec["N"]), _params(sec).qp, prec)

    def atom_bound(sec, prec):
        return check_atom_bound(_config(sec), prec=prec)

    def generating_function(sec, prec):
        zs = [complex(z) for z in sec["z"].split(",")]
        return check_generating_function(_config(sec), zs, prec)

    def q1(sec, prec):
        shape = sec.get("shape", "1,-1").split(",")
        qs = sec.get("q_list", "0.9,0.95,0.99").split(",")
        return check_q1_degeneration(int(sec["tau"]), shape, qs, int(sec.get("cells", "4")))

    def theorem_c(sec, prec):
        p = _params(sec)
        Xinf = InfiniteConfiguration(InfiniteDoubleSignature(_side(sec.get("plus")), _side(sec.get("minus"))), p)
        nus = [_ints(x) for x in sec.get("nus", "1|2|1,1").split("|")]
        return check_theoremC(Xinf, nus, int(sec["K"]), _ints(sec["N_list"]), prec=prec,
                              prune=float(sec.get("prune", "0")), engine=sec.get("engine", "mp"))

    table = {
        "stochastic": stochastic,
        "coherency": coherency,
        "special_general": special_general,
        "extended": extended,
        "okounkov": okounkov,
        "branching_link": branching_link,
        "symmetry": symmetry,
        "atom_bound": atom_bound,
        "generating_function": generating_function,
        "q1_degeneration": q1,
        "theoremC": theorem_c,
    }
    if kind not in table:
        raise ValueError(f"unknown check {kind!r}")
    return table[kind]


def load_manifest(text: str) -> list[tuple[str, dict]]:
    """Sections of an INI manifest, each with a ``check`` key naming the check."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_string(text)
    out = []
    for name in parser.sections():
        sec = dict(parser[name])
        if "check" not in sec:
            raise ValueError(f"section [{name}] has no 'check' key")
        _runner(sec["check"])  # validate early
        out.append((name, sec))
    return out


def suite_text(name: str) -> str:
    return resources.files("qtchain").joinpath("suites", f"{name}.ini").read_text()


def run_manifest(entries: list[tuple[str, dict]], prec: Precision | None = None) -> list[CheckReport]:
    prec = prec or Precision()
    reports = []
    for label, sec in entries:
        started = time.perf_counter()
        try:
            rep = _runner(sec["check"])(sec, prec)
        except Exception as exc:  # report, never hide
            rep = CheckReport(sec["check"], dict(sec), "error", 0.0, False, time.perf_counter() - started, {"error": repr(exc)})
        rep.name = label
        reports.append(rep)
    return reports
