"""Integer shape data: partitions, signatures, double signatures,
interlacing predicates and the Macdonald branching coefficient psi."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from mpmath import mpf

from .qcalc import QPair


class Signature(tuple):
    """Weakly decreasing tuple of integers of any sign."""

    def __new__(cls, coords: Iterable[int] = ()):
        coords = tuple(int(c) for c in coords)
        for a, b in zip(coords, coords[1:]):
            if a < b:
                raise ValueError(f"signature must be weakly decreasing: {coords}")
        return super().__new__(cls, coords)

    def __repr__(self):
        return f"Signature({tuple(self)})"

    def shifted(self, c: int) -> "Signature":
        return Signature(a + c for a in self)


class Partition(Signature):
    """Weakly decreasing tuple of positive integers; trailing zeros dropped."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = [int(p) for p in parts]
        while parts and parts[-1] == 0:
            parts.pop()
        if any(p < 0 for p in parts):
            raise ValueError(f"partition parts must be nonnegative: {parts}")
        return super().__new__(cls, parts)

    def __repr__(self):
        return f"Partition({tuple(self)})"

    @property
    def size(self) -> int:
        return sum(self)

    def boxes(self) -> Iterator[tuple[int, int]]:
        for i, part in enumerate(self, start=1):
            for j in range(1, part + 1):
                yield i, j

    def padded(self, n: int) -> tuple[int, ...]:
        if len(self) > n:
            raise ValueError(f"{self} has more than {n} parts")
        return tuple(self) + (0,) * (n - len(self))


@dataclass(frozen=True)
class DoubleSignature:
    """A vertex (a+, a-) of the extended graph at level k + l."""

    plus: Signature = Signature()
    minus: Signature = Signature()

    def __post_init__(self):
        object.__setattr__(self, "plus", Signature(self.plus))
        object.__setattr__(self, "minus", Signature(self.minus))

    @property
    def level(self) -> int:
        return len(self.plus) + len(self.minus)

    @property
    def k(self) -> int:
        return len(self.plus)

    @property
    def l(self) -> int:
        return len(self.minus)

    def to_json(self) -> dict:
        return {"plus": list(self.plus), "minus": list(self.minus)}

    @classmethod
    def from_json(cls, obj: dict) -> "DoubleSignature":
        return cls(Signature(obj.get("plus", [])), Signature(obj.get("minus", [])))


TAIL_RULES = ("finite", "constant", "arithmetic")


@dataclass(frozen=True)
class SideSequence:
    """One side of an infinite double signature: an explicit prefix and a
    continuation rule.  ``constant`` repeats the last prefix entry forever;
    ``arithmetic`` keeps subtracting ``step`` (a positive integer)."""

    prefix: tuple[int, ...] = ()
    rule: str = "finite"
    step: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(Signature(self.prefix)))
        if self.rule not in TAIL_RULES:
            raise ValueError(f"unknown tail rule {self.rule!r}")
        if self.rule != "finite" and not self.prefix:
            raise ValueError("an infinite tail needs a nonempty prefix")
        if self.rule == "arithmetic" and self.step <= 0:
            raise ValueError("arithmetic tail needs a positive step")

    @property
    def infinite(self) -> bool:
        return self.rule != "finite"

    def head(self, n: int) -> tuple[int, ...]:
        """First n entries (fewer if the side is finite and shorter)."""
        out = list(self.prefix[:n])
        while len(out) < n and self.infinite:
            last = out[-1]
            out.append(last if self.rule == "constant" else last - self.step)
        return tuple(out)


@dataclass(frozen=True)
class InfiniteDoubleSignature:
    plus: SideSequence
    minus: SideSequence

    def __post_init__(self):
        if not (self.plus.infinite or self.minus.infinite):
            raise ValueError("at least one side must be infinite")


def interlace_sig(a: Sequence[int], b: Sequence[int]) -> bool:
    """b ≺ a for signatures of lengths N and N-1."""
    if len(b) != len(a) - 1:
        raise ValueError("interlace_sig expects lengths N and N-1")
    return all(a[i] >= b[i] >= a[i + 1] for i in range(len(b)))


def _interlace_padded(a: Sequence[int], b: Sequence[int]) -> bool:
    # b ≺ a where a missing last coordinate of a counts as -infinity
    if len(b) == len(a) - 1:
        return interlace_sig(a, b)
    if len(b) == len(a):
        return all(a[i] >= b[i] for i in range(len(b))) and all(
            b[i] >= a[i + 1] for i in range(len(b) - 1)
        )
    return False


def interlace_double(a: DoubleSignature, b: DoubleSignature) -> bool:
    """Interlacing of double signatures at adjacent levels."""
    if b.level != a.level - 1:
        raise ValueError("interlace_double expects levels N and N-1")
    if b.k == a.k - 1 and b.l == a.l and a.k > 0:
        return _interlace_padded(a.plus, b.plus) and _interlace_padded(a.minus, b.minus)
    if b.k == a.k and b.l == a.l - 1 and a.l > 0:
        return _interlace_padded(a.plus, b.plus) and _interlace_padded(a.minus, b.minus)
    return False


def partitions(n: int, max_len: int | None = None) -> list[Partition]:
    """Partitions of n in reverse lexicographic order, optionally length-capped."""
    out: list[Partition] = []

    def rec(rest, cap, acc):
        if rest == 0:
            out.append(Partition(acc))
            return
        if max_len is not None and len(acc) >= max_len:
            return
        for p in range(min(rest, cap), 0, -1):
            rec(rest - p, p, acc + [p])

    rec(n, n, [])
    return out


def partitions_upto(n: int, max_len: int | None = None) -> list[Partition]:
    return [p for d in range(n + 1) for p in partitions(d, max_len)]


def interlacing_below(lam: Sequence[int], n: int) -> Iterator[Partition]:
    """All partitions mu ≺ lam with at most n-1 parts, lam read in n variables."""
    lp = tuple(lam) + (0,) * (n - len(lam))
    ranges = [range(lp[i + 1], lp[i] + 1) for i in range(n - 1)]
    for mu in itertools.product(*ranges):
        yield Partition(mu)


def dominates(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """lam >= mu in dominance order (same size assumed)."""
    a = b = 0
    for i in range(max(len(lam), len(mu))):
        a += lam[i] if i < len(lam) else 0
        b += mu[i] if i < len(mu) else 0
        if a < b:
            return False
    return True


def branching_psi(lam: Sequence[int], mu: Sequence[int], qp: QPair):
    """psi_{lam/mu}(q,t) in P_lam(x_1..x_N) = sum psi x_N^{|lam|-|mu|} P_mu(x_1..x_{N-1}).

    Uses the product over 1 <= i <= j <= l(mu) of
    f(q^{mu_i-mu_j} t^{j-i}) f(q^{lam_i-lam_{j+1}} t^{j-i})
    / (f(q^{lam_i-mu_j} t^{j-i}) f(q^{mu_i-lam_{j+1}} t^{j-i}))
    with f(u) = (tu;q)_inf/(qu;q)_inf.  Each pair of f values collapses to a
    finite product because the arguments differ by q^{lam_i-mu_i}.
    Signatures are accepted and shifted to partitions first.
    """
    lam, mu = tuple(lam), tuple(mu)
    low = min(list(lam) + list(mu) + [0])
    if low < 0:
        lam = tuple(a - low for a in lam)
        mu = tuple(b - low for b in mu)
    lam_p, mu_p = Partition(lam), Partition(mu)
    width = max(len(lam), len(mu) + 1)
    if not interlace_sig(lam_p.padded(width), mu_p.padded(width - 1)):
        raise ValueError(f"{mu} does not interlace {lam}")
    q, t = qp.mp()

    def lam_at(i):
        return lam_p[i - 1] if i <= len(lam_p) else 0

    def poch(z, n):
        out = mpf(1)
        for _ in range(n):
            out *= 1 - z
            z *= q
        return out

    out = mpf(1)
    ell = len(mu_p)
    for i in range(1, ell + 1):
        n = lam_at(i) - mu_p[i - 1]
        if n == 0:
            continue
        for j in range(i, ell + 1):
            w = t ** (j - i)
            u = q ** (mu_p[i - 1] - mu_p[j - 1]) * w
            v = q ** (mu_p[i - 1] - lam_at(j + 1)) * w
            out *= poch(t * u, n) / poch(q * u, n)
            out *= poch(q * v, n) / poch(t * v, n)
    return out
