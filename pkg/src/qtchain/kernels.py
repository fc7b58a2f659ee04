"""Cotransition kernels Lambda^N_{N-1}: single entries, whole rows,
compositions, the extended kernel on degenerate configurations and the
Dixon-Anderson continuum density."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
from mpmath import mpf

from . import core
from ._engine import row_engine
from .lattice import (
    MINUS,
    PLUS,
    Configuration,
    Params,
    admissible_pair,
    admissible_word,
    gaps,
    sort_descending,
    sparse_interlace,
    target_dsig,
)
from .qcalc import Precision, QPair, norm_constants, qpoch_finite, qpoch_infinite, to_mpf
from .shapes import DoubleSignature, Signature


@dataclass(frozen=True)
class KernelRow:
    """Truncated probability measure on level N-1 (or K) configurations."""

    source: Configuration
    atoms: tuple
    tail_bound: object

    def total(self):
        return sum((w for _, w in self.atoms), 0 * self.tail_bound)

    def as_dict(self) -> dict:
        return {Y.dsig: w for Y, w in self.atoms}

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "atoms": [{"target": Y.to_json(), "weight": _num(w)} for Y, w in self.atoms],
            "tail_bound": _num(self.tail_bound),
        }


@dataclass(frozen=True)
class ExtendedKernelRow(KernelRow):
    """Row of the extended kernel.  ``compliant[i]`` says whether atom i was
    stripped to a configuration Y* with Y* ≺≺ X*; non-compliant atoms keep
    their unstripped level N-1 target."""

    compliant: tuple = ()
    N: int = 0
    A: int = 0

    def violating_mass(self):
        return sum((w for (_, w), ok in zip(self.atoms, self.compliant) if not ok), 0 * self.tail_bound)

    def to_json(self) -> dict:
        out = super().to_json()
        for atom, ok in zip(out["atoms"], self.compliant):
            atom["sparse_interlaced"] = ok
        out["N"] = self.N
        out["A"] = self.A
        return out


def _num(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return mpmath.nstr(x, mpmath.mp.dps, min_fixed=-mpmath.inf, max_fixed=mpmath.inf) if x else "0"


def _resolve(X: Configuration, p: Params | None) -> Params:
    if p is not None and p != X.params:
        raise ValueError("params mismatch between the configuration and the call")
    return X.params


def vandermonde(xs: Sequence):
    out = mpf(1) if not xs or not isinstance(xs[0], float) else 1.0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            out *= xs[i] - xs[j]
    return out


# ---------------------------------------------------------------------------
# the R factor


def r_values(xs: Sequence, word: Sequence[int], ms: Sequence[int], q, t, prec: Precision | None = None):
    """R_{eps,m} at real points xs for a word whose targets p_r = r + eps(r)
    are distinct.  Product of three blocks:

    prod_r (q^{m_r+1};q)_inf / (q^{m_r} t;q)_inf
    prod_r prod_{s != p_r} (x_{p_r} t/x_s;q)_{m_r} / (x_{p_r} q/x_s;q)_{m_r}
    prod_{j != p*} (x_{p*} t/x_j;q)_inf / (x_{p*} q/x_j;q)_inf

    where p* is the single index of xs not of the form p_r.
    """
    N = len(xs)
    ps, pstar = _targets(N, word)
    out = mpf(1)
    for r in range(1, N):
        m, p = ms[r - 1], ps[r - 1]
        out *= qpoch_infinite(q ** (m + 1), q, prec) / qpoch_infinite(q**m * t, q, prec)
        xp = xs[p - 1]
        for s in range(1, N + 1):
            if s != p:
                out *= qpoch_finite(xp * t / xs[s - 1], q, m) / qpoch_finite(xp * q / xs[s - 1], q, m)
    xp = xs[pstar - 1]
    for j in range(1, N + 1):
        if j != pstar:
            out *= qpoch_infinite(xp * t / xs[j - 1], q, prec) / qpoch_infinite(xp * q / xs[j - 1], q, prec)
    return out


def _targets(N: int, word: Sequence[int]) -> tuple[list[int], int]:
    ps = [r + word[r - 1] for r in range(1, N)]
    missing = set(range(1, N + 1)) - set(ps)
    if len(missing) != 1:
        raise ValueError("word does not hit N-1 distinct points")
    return ps, missing.pop()


def r_values_theta(xs: Sequence, word: Sequence[int], ms: Sequence[int], q, t, prec: Precision | None = None):
    """R_{eps,m} from the direct double product, with each same-sign pair
    whose denominator could vanish rewritten through the theta-function
    quasi-periodicity:

        (y q/x;q)(x_p t/x;q) / ((y t/x;q)(x_p q/x;q))
          = (t/q)^m (x q/(y t);q)(x/x_p;q) / ((x/y;q)(x q/(x_p t);q)),

    for y = x_p q^m and x on the same side strictly below y.  Every
    denominator is then bounded away from zero for any t in (0,1).
    """
    N = len(xs)
    ps, pstar = _targets(N, word)
    out = mpf(1)
    for r in range(1, N):
        m, p = ms[r - 1], ps[r - 1]
        xp = xs[p - 1]
        y = xp * q**m
        out *= qpoch_infinite(q ** (m + 1), q, prec) / qpoch_infinite(q**m * t, q, prec)
        for s in range(1, N + 1):
            if s == p:
                continue
            x = xs[s - 1]
            if x * xp > 0 and abs(x) < abs(xp):
                num = qpoch_infinite(x * q / (y * t), q, prec) * qpoch_infinite(x / xp, q, prec)
                den = qpoch_infinite(x / y, q, prec) * qpoch_infinite(x * q / (xp * t), q, prec)
                out *= (t / q) ** m * num / den
            else:
                num = qpoch_infinite(y * q / x, q, prec) * qpoch_infinite(xp * t / x, q, prec)
                den = qpoch_infinite(y * t / x, q, prec) * qpoch_infinite(xp * q / x, q, prec)
                out *= num / den
    xp = xs[pstar - 1]
    for j in range(1, N + 1):
        if j != pstar:
            out *= qpoch_infinite(xp * t / xs[j - 1], q, prec) / qpoch_infinite(xp * q / xs[j - 1], q, prec)
    return out


def split_first_factor(xs: Sequence, word: Sequence[int], ms: Sequence[int], q, t, prec: Precision | None = None):
    """The ratio R_{eps,m}(x_1..x_N) / R_{eps',m'}(x_2..x_N) obtained by
    splitting off the largest positive point (needs x_2 > 0).

    Besides the factors attached to x_1 itself, each remaining target
    p_r (r >= 2) contributes (x_{p_r} t/x_1;q)_{m_r} / (x_{p_r} q/x_1;q)_{m_r};
    only the unpaired index carries the full infinite product.
    """
    N = len(xs)
    if N < 2 or not xs[1] > 0 or word[0] != 0:
        raise ValueError("splitting off x_1 needs at least two positive points")
    ps, pstar = _targets(N, word)
    m1 = ms[0]
    x1 = xs[0]
    out = qpoch_infinite(q ** (m1 + 1), q, prec) / qpoch_infinite(q**m1 * t, q, prec)
    for s in range(2, N + 1):
        out *= qpoch_finite(x1 * t / xs[s - 1], q, m1) / qpoch_finite(x1 * q / xs[s - 1], q, m1)
    for r in range(2, N):
        xp = xs[ps[r - 1] - 1]
        out *= qpoch_finite(xp * t / x1, q, ms[r - 1]) / qpoch_finite(xp * q / x1, q, ms[r - 1])
    xp = xs[pstar - 1]
    return out * qpoch_infinite(xp * t / x1, q, prec) / qpoch_infinite(xp * q / x1, q, prec)


def _check_admissible(X: Configuration, word, ms):
    N, k = X.level, X.k
    word, ms = tuple(word), tuple(ms)
    if len(word) != N - 1 or len(ms) != N - 1:
        raise ValueError("eps and m must have length N-1")
    eps_k = word[k - 1] if 0 < k < N else None
    if word != admissible_word(N, k, eps_k) or (eps_k is not None and eps_k not in (0, 1)):
        raise ValueError(f"eps = {word} is not adapted to k = {k}")
    for r, (m, l) in enumerate(zip(ms, gaps(X)), start=1):
        if m < 0 or (l is not None and m > l):
            raise ValueError(f"m_{r} = {m} outside its admissible range")
    return word, ms


def r_function(X: Configuration, eps, m, qp: QPair | None = None, prec: Precision | None = None):
    """R_{eps,m}(X; q, t) for an X-admissible pair, by the resonance-free product."""
    prec = prec or Precision()
    qp = qp or X.params.qp
    word, ms = _check_admissible(X, eps, m)
    with prec.context():
        q, t = qp.mp()
        val = r_values(X.values(), word, ms, q, t, prec)
    return val


def r_function_theta(X: Configuration, eps, m, qp: QPair | None = None, prec: Precision | None = None):
    """Third route for R_{eps,m}(X): the direct product with vanishing-prone
    pairs rewritten (see :func:`r_values_theta`).  No genericity guard needed."""
    prec = prec or Precision()
    qp = qp or X.params.qp
    word, ms = _check_admissible(X, eps, m)
    with prec.context():
        q, t = qp.mp()
        val = r_values_theta(X.values(), word, ms, q, t, prec)
    return val


def _genericity_margin(N: int, q, t, M: int = 60):
    return min(abs(t**j - q**m) for j in range(1, N) for m in range(-M, M + 1))


def r_function_direct(X: Configuration, eps, m, qp: QPair | None = None, prec: Precision | None = None, margin: float = 1e-6):
    """R_{eps,m}(X) from the unsimplified double product

        prod_{r,s} (y_r q/x_s;q)_inf / (y_r t/x_s;q)_inf
        * prod_{i != j} (x_i t/x_j;q)_inf / (x_i q/x_j;q)_inf,

    with the factors that vanish identically on the lattice cancelled in
    pairs.  Requires t^j to stay away from integer powers of q.
    """
    prec = prec or Precision()
    qp = qp or X.params.qp
    word, ms = _check_admissible(X, eps, m)
    N = X.level
    with prec.context():
        q, t = qp.mp()
        if _genericity_margin(N, q, t) <= margin:
            raise ValueError("t is too close to a resonance t^j = q^m")
        pts = X.points
        vals = X.values()
        xexp = [(pt.side, -pt.coord, pt.row - 1) for pt in pts]
        yexp = []
        yvals = []
        for r in range(1, N):
            p = r + word[r - 1]
            side, qe, te = xexp[p - 1]
            yexp.append((side, qe + ms[r - 1], te))
            yvals.append(vals[p - 1] * q ** ms[r - 1])

        zeros = 0

        def poch(num_val, num_exp, den_exp, dq, dt, value):
            # (value; q)_inf with an exactly vanishing factor removed
            nonlocal_zero = 0
            if num_exp[0] == den_exp[0] and num_exp[2] - den_exp[2] + dt == 0:
                n0 = -(num_exp[1] - den_exp[1] + dq)
                if n0 >= 0:
                    nonlocal_zero = 1
                    return (
                        qpoch_finite(value, q, n0) * qpoch_infinite(value * q ** (n0 + 1), q, prec),
                        nonlocal_zero,
                    )
            return qpoch_infinite(value, q, prec), 0

        out = mpf(1)
        for r in range(N - 1):
            for s in range(N):
                a, za = poch(yvals[r], yexp[r], xexp[s], 1, 0, yvals[r] * q / vals[s])
                b, zb = poch(yvals[r], yexp[r], xexp[s], 0, 1, yvals[r] * t / vals[s])
                out *= a / b
                zeros += za - zb
        for i in range(N):
            for j in range(N):
                if i == j:
                    continue
                a, za = poch(vals[i], xexp[i], xexp[j], 0, 1, vals[i] * t / vals[j])
                b, zb = poch(vals[i], xexp[i], xexp[j], 1, 0, vals[i] * q / vals[j])
                out *= a / b
                zeros += za - zb
        if zeros != 0:
            raise ArithmeticError("unbalanced vanishing factors; pair is not admissible")
    return out


# ---------------------------------------------------------------------------
# single entries


def kernel_general(X: Configuration, Y: Configuration, p: Params | None = None, prec: Precision | None = None):
    """Lambda(X, Y) for any (q, t): C~_N V(Y)/V(X) prod|y| R_{eps,m}(X)."""
    _resolve(X, p)
    if X.params != Y.params:
        raise ValueError("params mismatch between X and Y")
    prec = prec or Precision()
    pair = admissible_pair(X, Y)
    if pair is None:
        return mpf(0)
    word, ms = pair
    with prec.context():
        q, t = X.params.qp.mp()
        xs, ys = X.values(), Y.values()
        _, ct = norm_constants(X.level, X.params.qp, prec)
        val = ct * vandermonde(ys) / vandermonde(xs) * mpmath.fprod(abs(y) for y in ys)
        val *= r_values(xs, word, ms, q, t, prec)
    return val


def kernel_special(X: Configuration, Y: Configuration, tau: int, p: Params | None = None, prec: Precision | None = None):
    """Lambda(X, Y) when t = q^tau, through finite (.;q)_{tau-1} products."""
    _resolve(X, p)
    qp = X.params.qp
    if qp.tau is None or qp.tau != tau:
        raise ValueError("kernel_special needs parameters built with t = q^tau")
    if X.params != Y.params:
        raise ValueError("params mismatch between X and Y")
    if admissible_pair(X, Y) is None:
        return mpf(0)
    prec = prec or Precision()
    with prec.context():
        q, _ = qp.mp()
        xs, ys = X.values(), Y.values()
        _, ct = norm_constants(X.level, qp, prec)
        val = ct * vandermonde(ys) / vandermonde(xs) * mpmath.fprod(abs(y) for y in ys)
        for y in ys:
            for x in xs:
                val *= qpoch_finite(y * q / x, q, tau - 1)
        for i, x in enumerate(xs):
            for j, x2 in enumerate(xs):
                if i != j:
                    val /= qpoch_finite(x * q / x2, q, tau - 1)
    return val


def kernel_tau_one(X: Configuration, Y: Configuration, prec: Precision | None = None):
    """Closed form at t = q: (q;q)_{N-1} prod|y| V(Y)/V(X) on interlacing pairs."""
    if admissible_pair(X, Y) is None:
        return mpf(0)
    prec = prec or Precision()
    with prec.context():
        q, _ = X.params.qp.mp()
        xs, ys = X.values(), Y.values()
        val = qpoch_finite(q, q, X.level - 1) * mpmath.fprod(abs(y) for y in ys) * vandermonde(ys) / vandermonde(xs)
    return val


# ---------------------------------------------------------------------------
# rows


def _assemble(X: Configuration, entries, tail, sort: bool = True) -> KernelRow:
    atoms = []
    for eps_k, ms, w in entries:
        Y = Configuration(X.params, target_dsig(X.dsig, eps_k, ms))
        atoms.append((Y, w))
    if sort:
        atoms = sort_descending(atoms, key=lambda a: a[0])
    return KernelRow(X, tuple(atoms), tail)


def kernel_row(
    X: Configuration,
    p: Params | None = None,
    prec: Precision | None = None,
    m_max: int | None = None,
    budget=None,
) -> KernelRow:
    """The row Lambda(X, .) with a certified bound on the unenumerated mass.

    Without ``m_max`` the straddle index runs until the certified tail of
    every straddle chain is below its share of ``budget`` (default
    ``prec.eps``); with ``m_max`` it stops at that depth and reports
    whatever tail remains.
    """
    _resolve(X, p)
    prec = prec or Precision()
    N = X.level
    if N < 2:
        raise ValueError("kernel rows need N >= 2")
    with prec.context():
        q, t = X.params.qp.mp()
        _, ct = norm_constants(N, X.params.qp, prec)
        entries, tail = row_engine(
            X.values(), X.k, gaps(X), q, t, ct,
            lambda z: qpoch_infinite(z, q, prec), to_mpf(prec.eps if budget is None else budget), m_max,
        )
        entries = [(e, ms, +w) for e, ms, w in entries]
        tail = +tail
    return _assemble(X, entries, tail)


def float_entries(X: Configuration, eps: float = 1e-14, m_max: int | None = None):
    """Raw ``(eps_k, ms, weight)`` entries and tail from the compiled core."""
    N = X.level
    if N < 2:
        raise ValueError("kernel rows need N >= 2")
    q, t = X.params.qp.floats()
    ct = core.poch_inf(t, q) ** N / (core.poch_inf(t**N, q) * core.poch_inf(q, q) ** (N - 1))
    return core.row_float(X.float_values(), X.k, gaps(X), q, t, ct, eps, m_max)


def kernel_row_float(X: Configuration, eps: float = 1e-14, m_max: int | None = None, sort: bool = True) -> KernelRow:
    """Double-precision row through the compiled core (sampling path)."""
    entries, tail = float_entries(X, eps, m_max)
    return _assemble(X, entries, tail, sort)


def kernel_compose(
    X: Configuration,
    K: int,
    p: Params | None = None,
    prec: Precision | None = None,
    prune: float = 0.0,
    keep: Callable[[Configuration], bool] | None = None,
    engine: str = "mp",
) -> KernelRow:
    """Lambda^N_K(X, .) by composing rows level by level.

    Each level may lose at most ``prec.eps / (N - K)`` to row tails: an
    intermediate atom of weight w among n is expanded with tail budget
    ``eps_level / (w n)``, so light atoms get short straddle chains.
    Atoms whose weight falls below ``prune``, or that ``keep`` rejects, are
    moved into the deficit.  ``keep`` is meant for exact restrictions
    (atoms that cannot reach the targets of interest).

    ``engine="float"`` builds every row in double precision through the
    compiled core: weights then carry about 1e-13 relative error, which is
    plenty for boundary diagnostics and far faster for two-sided sources.
    """
    _resolve(X, p)
    prec = prec or Precision()
    N = X.level
    if not 1 <= K < N:
        raise ValueError("need 1 <= K < N")
    if engine == "float":
        return _compose_float(X, K, max(float(prec.eps), 1e-15), float(prune), keep)
    if engine != "mp":
        raise ValueError(f"unknown engine {engine!r}")
    current = {X.dsig: mpf(1)}
    deficit = mpf(0)
    with prec.context():
        eps_level = to_mpf(prec.eps) / (N - K)
        prune = to_mpf(prune)
        for level in range(N, K, -1):
            nxt: dict = {}
            n = len(current)
            for a, w in current.items():
                row = kernel_row(Configuration(X.params, a), prec=prec, budget=eps_level / (w * n))
                deficit += w * row.tail_bound
                for Y, v in row.atoms:
                    nxt[Y.dsig] = nxt.get(Y.dsig, 0) + w * v
            current = {}
            for b, w in nxt.items():
                if (keep is not None and not keep(Configuration(X.params, b))) or w < prune:
                    deficit += w
                else:
                    current[b] = w
        deficit = +deficit
    atoms = [(Configuration(X.params, b), w) for b, w in current.items()]
    return KernelRow(X, tuple(sort_descending(atoms, key=lambda a: a[0])), deficit)


def _compose_float(X: Configuration, K: int, eps: float, prune: float, keep) -> KernelRow:
    N = X.level
    eps_level = eps / (N - K)
    current = {X.dsig: 1.0}
    deficit = 0.0
    for level in range(N, K, -1):
        nxt: dict = {}
        n = len(current)
        for a, w in current.items():
            entries, tail = float_entries(Configuration(X.params, a), eps_level / (w * n))
            deficit += w * float(tail)
            for eps_k, ms, v in entries:
                b = target_dsig(a, eps_k, ms)
                nxt[b] = nxt.get(b, 0.0) + w * v
        current = {}
        for b, w in nxt.items():
            if (keep is not None and not keep(Configuration(X.params, b))) or w < prune:
                deficit += w
            else:
                current[b] = w
    atoms = [(Configuration(X.params, b), mpf(w)) for b, w in current.items()]
    return KernelRow(X, tuple(sort_descending(atoms, key=lambda a: a[0])), mpf(deficit))


# ---------------------------------------------------------------------------
# extended kernel


def inserted_configuration(Xs: Configuration, N: int, A: int) -> tuple[Configuration, str, int]:
    """X_A: X* with d = N - n points x+ q^A t^i (i = 1..d) inserted next to
    the innermost positive point (the innermost negative one when X* has no
    positive points).  Returns (X_A, side of insertion, row of x+)."""
    n = Xs.level
    if n >= N:
        raise ValueError("extended_kernel_row needs n < N; use kernel_row for n = N")
    if A < 1:
        raise ValueError("A must be a positive integer")
    d = N - n
    a = Xs.dsig
    if a.k > 0:
        base = a.plus[-1] - A
        new = DoubleSignature(Signature(a.plus + (base,) * d), a.minus)
        return Configuration(Xs.params, new), PLUS, a.k
    if a.l > 0:
        base = a.minus[-1] - A
        new = DoubleSignature(a.plus, Signature(a.minus + (base,) * d))
        return Configuration(Xs.params, new), MINUS, a.l
    # empty X*: the inserted block starts at zeta+ q^A
    new = DoubleSignature(Signature((-A,) * d), Signature())
    return Configuration(Xs.params, new), PLUS, 0


def strip_inserted(Xs: Configuration, Y: Configuration, side: str, row: int, d: int, A: int):
    """Remove the copy of the inserted block carried by Y; None when Y does
    not contain it in the position that makes Y* a level-n configuration."""
    b = Y.dsig
    a = Xs.dsig
    seq = b.plus if side == PLUS else b.minus
    kept_len = (a.k if side == PLUS else a.l)
    if len(seq) != kept_len + d - 1:
        return None
    anchor = (a.plus[-1] if side == PLUS else a.minus[-1]) - A if kept_len else -A
    block = seq[kept_len:]
    if any(v != anchor for v in block):
        return None
    core_seq = Signature(seq[:kept_len])
    new = DoubleSignature(core_seq, b.minus) if side == PLUS else DoubleSignature(b.plus, core_seq)
    return Configuration(Xs.params, new)


def extended_kernel_row(Xs: Configuration, N: int, A: int, p: Params | None = None, prec: Precision | None = None) -> ExtendedKernelRow:
    """Row of kernel_row(X_A) with atoms relabelled by stripping the inserted block."""
    _resolve(Xs, p)
    prec = prec or Precision()
    XA, side, row = inserted_configuration(Xs, N, A)
    d = N - Xs.level
    base = kernel_row(XA, prec=prec)
    atoms, flags = [], []
    for Y, w in base.atoms:
        Ystar = strip_inserted(Xs, Y, side, row, d, A)
        if Ystar is not None and Xs.level > 0 and sparse_interlace(Xs, Ystar):
            atoms.append((Ystar, w))
            flags.append(True)
        elif Ystar is not None and Xs.level == 0:
            atoms.append((Ystar, w))
            flags.append(True)
        else:
            atoms.append((Y, w))
            flags.append(False)
    return ExtendedKernelRow(Xs, tuple(atoms), base.tail_bound, tuple(flags), N, A)


# ---------------------------------------------------------------------------
# continuum limit


def dixon_anderson(XX: Sequence, YY: Sequence, tau) -> mpf:
    """Gamma(N tau)/Gamma(tau)^N V(Y) V(X)^{1-2 tau} prod |x_i - y_r|^{tau-1}."""
    xs = [to_mpf(x) for x in XX]
    ys = [to_mpf(y) for y in YY]
    tau = to_mpf(tau)
    N = len(xs)
    if len(ys) != N - 1:
        raise ValueError("need N-1 interlacing points")
    for i, y in enumerate(ys):
        if not xs[i] > y > xs[i + 1]:
            raise ValueError("points must interlace strictly")
    for a, b in zip(xs, xs[1:]):
        if not a > b:
            raise ValueError("XX must be strictly decreasing")
    cross = mpmath.fprod(abs(x - y) for x in xs for y in ys)
    return (
        mpmath.gamma(N * tau) / mpmath.gamma(tau) ** N
        * vandermonde(ys) * vandermonde(xs) ** (1 - 2 * tau) * cross ** (tau - 1)
    )
