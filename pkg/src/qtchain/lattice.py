"""Point configurations of the extended Gelfand-Tsetlin graph.

A configuration is stored through its double signature; every comparison
that decides interlacing is done on integer lattice data.  Real values are
produced only on request, at the active mpmath precision.
"""

from __future__ import annotations

import decimal
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from mpmath import mpf

from .qcalc import Precision, QPair, to_fraction, to_mpf
from .shapes import DoubleSignature, InfiniteDoubleSignature, Signature

PLUS, MINUS = "+", "-"


@dataclass(frozen=True)
class Params:
    """(q, t, zeta_plus, zeta_minus), kept as exact rationals."""

    qp: QPair
    zeta_plus: Fraction = Fraction(1)
    zeta_minus: Fraction = Fraction(-1)

    def __post_init__(self):
        zp, zm = to_fraction(self.zeta_plus), to_fraction(self.zeta_minus)
        if not zp > 0:
            raise ValueError("zeta_plus must be positive")
        if not zm < 0:
            raise ValueError("zeta_minus must be negative")
        object.__setattr__(self, "zeta_plus", zp)
        object.__setattr__(self, "zeta_minus", zm)

    @classmethod
    def make(cls, q, t=None, tau: int | None = None, zeta_plus=1, zeta_minus=-1) -> "Params":
        if (t is None) == (tau is None):
            raise ValueError("give exactly one of t and tau")
        qp = QPair.from_tau(q, tau) if tau is not None else QPair(q, t)
        return cls(qp, zeta_plus, zeta_minus)

    def zeta(self, side: str) -> Fraction:
        return self.zeta_plus if side == PLUS else self.zeta_minus

    def to_json(self) -> dict:
        out = {
            "q": _dec(self.qp.q),
            "t": _dec(self.qp.t),
            "zeta_plus": _dec(self.zeta_plus),
            "zeta_minus": _dec(self.zeta_minus),
        }
        if self.qp.tau is not None:
            out["tau"] = self.qp.tau
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Params":
        if "tau" in obj:
            qp = QPair.from_tau(obj["q"], obj["tau"])
        else:
            qp = QPair(obj["q"], obj["t"])
        return cls(qp, obj.get("zeta_plus", "1"), obj.get("zeta_minus", "-1"))


def _dec(x: Fraction) -> str:
    """Exact text for a rational: a decimal when it terminates, else num/den."""
    den = x.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    with decimal.localcontext() as ctx:
        ctx.prec = 400
        d = decimal.Decimal(x.numerator) / decimal.Decimal(x.denominator)
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


@dataclass(frozen=True, order=True)
class LatticePoint:
    """zeta_side * q^(-coord) * t^(row-1)."""

    side: str
    row: int
    coord: int

    def value(self, p: Params) -> mpf:
        q, t = p.qp.mp()
        return to_mpf(p.zeta(self.side)) * q ** (-self.coord) * t ** (self.row - 1)


@dataclass(frozen=True)
class Configuration:
    """A point of Omega_N, identified by its double signature."""

    params: Params
    dsig: DoubleSignature

    @property
    def level(self) -> int:
        return self.dsig.level

    @property
    def k(self) -> int:
        return self.dsig.k

    @property
    def points(self) -> tuple[LatticePoint, ...]:
        """Points in descending order of real value."""
        plus = [LatticePoint(PLUS, i + 1, a) for i, a in enumerate(self.dsig.plus)]
        minus = [LatticePoint(MINUS, j + 1, a) for j, a in enumerate(self.dsig.minus)]
        return tuple(plus + minus[::-1])

    def values(self) -> list[mpf]:
        return [pt.value(self.params) for pt in self.points]

    def float_values(self) -> list[float]:
        q, t = self.params.qp.floats()
        zp, zm = float(self.params.zeta_plus), float(self.params.zeta_minus)
        out = [zp * q ** (-a) * t**i for i, a in enumerate(self.dsig.plus)]
        out += [zm * q ** (-a) * t**j for j, a in enumerate(self.dsig.minus)][::-1]
        return out

    def to_json(self, with_values: bool = True) -> dict:
        out = {"params": self.params.to_json(), **self.dsig.to_json()}
        if with_values:
            out["values"] = [f"{v:.17g}" for v in self.float_values()]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Configuration":
        return cls(Params.from_json(obj["params"]), DoubleSignature.from_json(obj))


def config_from_dsig(a: DoubleSignature, p: Params) -> Configuration:
    return Configuration(p, DoubleSignature(a.plus, a.minus))


def dsig_from_config(X: Configuration) -> DoubleSignature:
    # validate that the stored points really come from a double signature
    pts = X.points
    plus = [pt for pt in pts if pt.side == PLUS]
    minus = [pt for pt in pts if pt.side == MINUS][::-1]
    for side in (plus, minus):
        if [pt.row for pt in side] != list(range(1, len(side) + 1)):
            raise ValueError("malformed lattice data: rows are not 1..n")
    return DoubleSignature(
        Signature(pt.coord for pt in plus), Signature(pt.coord for pt in minus)
    )


def _exponents(pt: LatticePoint) -> tuple[str, int, int]:
    """(side, q-exponent, t-exponent) of a point."""
    return pt.side, -pt.coord, pt.row - 1


def gaps(X: Configuration) -> list[int | None]:
    """l_r for r = 1..N-1 (None at the straddle index r = k when 0 < k < N).

    Same-side neighbours satisfy x_{r+1} = x_r t q^{l_r} (plus side) and
    x_r = x_{r+1} t q^{l_r} (minus side).
    """
    a, N, k = X.dsig, X.level, X.k
    out: list[int | None] = []
    for r in range(1, N):
        if r < k:
            out.append(a.plus[r - 1] - a.plus[r])
        elif r > k:
            j = N - r
            out.append(a.minus[j - 1] - a.minus[j])
        else:
            out.append(None)
    return out


def admissible_pair(X: Configuration, Y: Configuration):
    """The X-admissible (eps, m) whose image is Y, or None when Y does not
    interlace X.  Decided on exact exponents, case by case."""
    if X.params != Y.params:
        raise ValueError("configurations carry different parameters")
    N, k = X.level, X.k
    if Y.level != N - 1:
        return None
    xs, ys = X.points, Y.points
    ls = gaps(X)
    word, ms = [], []
    for r in range(1, N):
        ey = _exponents(ys[r - 1])
        if r < k:
            cands = [r]
        elif r > k:
            cands = [r + 1]
        else:
            cands = [k, k + 1]
        found = None
        for p in cands:
            ex = _exponents(xs[p - 1])
            if ex[0] != ey[0] or ex[2] != ey[2]:
                continue
            m = ey[1] - ex[1]
            if m < 0 or (r != k and m > ls[r - 1]):
                continue
            found = (p - r, m)
        if found is None:
            return None
        word.append(found[0])
        ms.append(found[1])
    return tuple(word), tuple(ms)


def interlace_config(X: Configuration, Y: Configuration) -> bool:
    """Y ≺ X, decided case by case on exact exponents."""
    return admissible_pair(X, Y) is not None


def admissible_word(N: int, k: int, eps_k: int | None) -> tuple[int, ...]:
    """The k-adapted binary word: 0 before k, 1 after k, eps_k at k."""
    return tuple(0 if r < k else 1 if r > k else eps_k for r in range(1, N))


def target_dsig(a: DoubleSignature, eps_k: int | None, ms: Sequence[int]) -> DoubleSignature:
    """Double signature of y_r = x_{r+eps(r)} q^{m_r}."""
    N, k = a.level, a.k
    plus = list(a.plus[: max(k - 1, 0)])
    minus = list(a.minus)
    for r in range(1, N):
        m = ms[r - 1]
        if r < k:
            plus[r - 1] = a.plus[r - 1] - m
        elif r > k:
            j = N - r
            minus[j - 1] = a.minus[j - 1] - m
    if 0 < k < N:
        if eps_k == 0:
            plus.append(a.plus[k - 1] - ms[k - 1])
            minus = minus[:-1]
        else:
            minus[-1] = a.minus[-1] - ms[k - 1]
    elif k == 0:
        minus = minus[:-1]
    return DoubleSignature(Signature(plus), Signature(minus))


def default_m_max(p: Params, prec: Precision) -> int:
    """Smallest M with max(q,t)^M < eps / (1 - max(q,t))."""
    r = float(max(p.qp.q, p.qp.t))
    target = prec.eps / (1 - r)
    return max(0, math.floor(math.log(target) / math.log(r)) + 1)


def cotransitions(X: Configuration, m_max: int):
    """All (Y, eps, m) with Y ≺ X and straddle index at most m_max,
    in descending order of Y."""
    N, k = X.level, X.k
    if N < 2:
        raise ValueError("cotransitions need N >= 2")
    ls = gaps(X)
    free = [r for r in range(1, N) if ls[r - 1] is not None]
    straddle = 0 < k < N
    out = []
    for combo in itertools.product(*(range(ls[r - 1] + 1) for r in free)):
        ms = [0] * (N - 1)
        for r, m in zip(free, combo):
            ms[r - 1] = m
        choices = [(e, m) for e in (0, 1) for m in range(m_max + 1)] if straddle else [(None, 0)]
        for e, m in choices:
            if straddle:
                ms[k - 1] = m
            b = target_dsig(X.dsig, e, ms)
            out.append((Configuration(X.params, b), admissible_word(N, k, e), tuple(ms)))
    return sort_descending(out, key=lambda item: item[0])


def sort_descending(items, key=lambda c: c):
    """Sort by the descending real values of configurations (lexicographic),
    ties broken by the double signature."""

    def sort_key(it):
        c = key(it)
        return [-v for v in c.float_values()], c.dsig.plus, c.dsig.minus

    return sorted(items, key=sort_key)


@dataclass(frozen=True)
class LatticeNode:
    """A node zeta_side * q^n of the two-sided lattice."""

    side: str
    n: int

    def value(self, p: Params) -> mpf:
        q, _ = p.qp.mp()
        return to_mpf(p.zeta(self.side)) * q**self.n


@dataclass(frozen=True)
class QInterval:
    lo: LatticeNode
    hi: LatticeNode
    tau: int
    infinite: bool
    nodes: tuple[LatticeNode, ...] = ()

    def __iter__(self) -> Iterator[LatticeNode]:
        if not self.infinite:
            yield from self.nodes
            return
        # plus nodes from hi downwards, interleaved with minus nodes from lo
        for j in itertools.count():
            yield LatticeNode(PLUS, self.hi.n + j)
            yield LatticeNode(MINUS, self.lo.n + j)


def as_node(x, p: Params) -> LatticeNode:
    if isinstance(x, LatticeNode):
        return x
    if isinstance(x, LatticePoint):
        tau = p.qp.tau
        if tau is None:
            raise ValueError("lattice points map to nodes only when t = q^tau")
        return LatticeNode(x.side, -x.coord + tau * (x.row - 1))
    raise TypeError("expected a LatticeNode or LatticePoint")


def q_interval(x_lo, x_hi, tau: int, p: Params) -> QInterval:
    """The q-interval Int_tau(x_lo, x_hi) as a node set."""
    lo, hi = as_node(x_lo, p), as_node(x_hi, p)
    if lo.side == PLUS and hi.side == PLUS:
        if not lo.n > hi.n:
            raise ValueError("need x_lo < x_hi")
        if lo.n - hi.n < tau:
            raise ValueError("endpoints violate tau-separation")
        return QInterval(lo, hi, tau, False, tuple(LatticeNode(PLUS, n) for n in range(hi.n, lo.n - tau + 1)))
    if lo.side == MINUS and hi.side == MINUS:
        if not hi.n > lo.n:
            raise ValueError("need x_lo < x_hi")
        if hi.n - lo.n < tau:
            raise ValueError("endpoints violate tau-separation")
        return QInterval(lo, hi, tau, False, tuple(LatticeNode(MINUS, n) for n in range(hi.n - tau, lo.n - 1, -1)))
    if lo.side == MINUS and hi.side == PLUS:
        return QInterval(lo, hi, tau, True)
    raise ValueError("need x_lo < x_hi")


def sparse_interlace(Xs: Configuration, Ys: Configuration) -> bool:
    """Y* ≺≺ X*: same level and sign split, each side interlacing in the
    equal-length sense whose last entry is unbounded towards zero."""
    if Xs.level != Ys.level:
        raise ValueError("sparse_interlace expects equal levels")
    if Xs.params != Ys.params:
        raise ValueError("configurations carry different parameters")
    a, b = Xs.dsig, Ys.dsig
    if a.k != b.k:
        return False
    for s, r in ((a.plus, b.plus), (a.minus, b.minus)):
        n = len(s)
        if any(r[i] > s[i] for i in range(n)):
            return False
        if any(r[i] < s[i + 1] for i in range(n - 1)):
            return False
    return True


@dataclass(frozen=True)
class InfiniteConfiguration:
    """X_infinity(a) together with a truncation level delta."""

    source: InfiniteDoubleSignature
    params: Params
    delta: float = 1e-30

    def _side_magnitudes(self, side: str, count: int) -> list[tuple[mpf, int]]:
        seq = self.source.plus if side == PLUS else self.source.minus
        q, t = self.params.qp.mp()
        z = abs(to_mpf(self.params.zeta(side)))
        return [(z * q ** (-a) * t**i, a) for i, a in enumerate(seq.head(count))]

    def prefix(self, N: int) -> Configuration:
        """The N points of largest absolute value, as a configuration."""
        kp = km = 0
        plus = self._side_magnitudes(PLUS, N)
        minus = self._side_magnitudes(MINUS, N)
        for _ in range(N):
            cp = plus[kp][0] if kp < len(plus) else None
            cm = minus[km][0] if km < len(minus) else None
            if cm is None or (cp is not None and cp >= cm):
                if cp is None:
                    raise ValueError("configuration has fewer than N points")
                kp += 1
            else:
                km += 1
        a = DoubleSignature(
            Signature(x[1] for x in plus[:kp]), Signature(x[1] for x in minus[:km])
        )
        return Configuration(self.params, a)

    def truncated(self, delta=None, cap: int = 5000) -> Configuration:
        """All points with |x| >= delta."""
        delta = to_mpf(self.delta if delta is None else delta)
        counts = []
        for side in (PLUS, MINUS):
            seq = self.source.plus if side == PLUS else self.source.minus
            n = 0
            q, t = self.params.qp.mp()
            z = abs(to_mpf(self.params.zeta(side)))
            while True:
                head = seq.head(n + 1)
                if len(head) <= n:
                    break
                if z * q ** (-head[n]) * t**n < delta:
                    break
                n += 1
                if n > cap:
                    raise ValueError("truncation keeps too many points; raise delta")
            counts.append(n)
        a = DoubleSignature(
            Signature(self.source.plus.head(counts[0])),
            Signature(self.source.minus.head(counts[1])),
        )
        return Configuration(self.params, a)


def random_dsig(rng, N: int, lo: int = -3, hi: int = 3, k: int | None = None) -> DoubleSignature:
    """A random double signature with entries in [lo, hi]."""
    if k is None:
        k = int(rng.integers(0, N + 1))
    plus = sorted((int(v) for v in rng.integers(lo, hi + 1, size=k)), reverse=True)
    minus = sorted((int(v) for v in rng.integers(lo, hi + 1, size=N - k)), reverse=True)
    return DoubleSignature(Signature(plus), Signature(minus))
