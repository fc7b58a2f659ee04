"""The down Markov chain: sampling, Gibbs path weights, kernel moments and
approximation of boundary kernels by finite truncations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mpf

from .kernels import KernelRow, float_entries, kernel_compose, kernel_general
from .lattice import Configuration, InfiniteConfiguration, Params, target_dsig
from .macdonald import MacdonaldBank, eval as mac_eval
from .qcalc import Precision, QPair, gen_pochhammer
from .shapes import Partition

#: straddle depth of the first enumeration when sampling
INITIAL_DEPTH = 32
#: number of depth doublings before a draw is declared exhausted
MAX_DEEPEN = 14


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the same seed gives the same stream everywhere."""
    return np.random.Generator(np.random.Philox(int(seed)))


class RNGExhausted(RuntimeError):
    pass


class RowSampler:
    """Inverse-CDF sampler for one kernel row in double precision.

    Atoms are ordered by straddle index first, so deepening the enumeration
    only appends atoms and never moves the cumulative sums of earlier ones;
    a uniform that lands past the enumerated mass is simply resolved
    against the deeper enumeration.
    """

    def __init__(self, X: Configuration, depth: int = INITIAL_DEPTH, eps: float = 1e-15):
        self.X = X
        self.eps = eps
        self.straddle = 0 < X.k < X.level
        self.depth = depth
        self.deepenings = 0
        self._build()

    def _build(self):
        k = self.X.k
        entries, tail = float_entries(self.X, self.eps, self.depth if self.straddle else None)
        if self.straddle:
            entries.sort(key=lambda e: (e[1][k - 1], e[0], e[1]))
        else:
            tail = 0.0
        self.entries = entries
        self.weights = np.array([w for _, _, w in entries], dtype=float)
        self.cdf = np.cumsum(self.weights)
        self.tail = float(tail)

    def deepen(self):
        if self.deepenings >= MAX_DEEPEN:
            raise RNGExhausted("straddle enumeration did not cover the draw")
        self.depth *= 2
        self.deepenings += 1
        self._build()

    def target(self, idx: int) -> Configuration:
        e, ms, _ = self.entries[idx]
        return Configuration(self.X.params, target_dsig(self.X.dsig, e, ms))

    def index_of(self, u: float) -> tuple[int, int]:
        """Atom index for a uniform u, with the number of deepenings it forced."""
        events = 0
        while True:
            idx = int(np.searchsorted(self.cdf, u, side="right"))
            if idx < len(self.cdf):
                return idx, events
            if self.straddle and self.tail > 0 and self.deepenings < MAX_DEEPEN:
                self.deepen()
                events += 1
                continue
            # only rounding mass is left
            return len(self.cdf) - 1, events

    def draw(self, rng: np.random.Generator) -> tuple[Configuration, int]:
        idx, events = self.index_of(float(rng.random()))
        return self.target(idx), events

    def counts(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Atom counts over n independent draws."""
        us = rng.random(n)
        idx = np.searchsorted(self.cdf, us, side="right")
        spill = us[idx >= len(self.cdf)]
        for u in spill:
            self.index_of(float(u))
        idx = np.searchsorted(self.cdf, us, side="right")
        idx = np.minimum(idx, len(self.cdf) - 1)
        return np.bincount(idx, minlength=len(self.cdf))


@dataclass(frozen=True)
class PathSample:
    levels: tuple
    seed: int | None = None
    truncation_events: int = 0

    def __post_init__(self):
        for i, (a, b) in enumerate(zip(self.levels, self.levels[1:])):
            if b.level != a.level - 1:
                raise ValueError(f"level {i + 1} of the path has the wrong size")

    @property
    def top(self) -> Configuration:
        return self.levels[0]

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "truncation_events": self.truncation_events,
            "params": self.top.params.to_json(),
            "levels": [{"plus": list(c.dsig.plus), "minus": list(c.dsig.minus)} for c in self.levels],
        }


def sample_cotransition(
    X: Configuration,
    rng: np.random.Generator,
    p: Params | None = None,
    prec: Precision | None = None,
    cache: dict | None = None,
) -> tuple[Configuration, int]:
    """Draw Y from the row of X.  Returns (Y, number of deepenings).

    Sampling runs in double precision; ``prec`` is accepted for a uniform
    call signature and only its ``eps`` is used, floored at 1e-15.
    """
    if p is not None and p != X.params:
        raise ValueError("params mismatch")
    if X.level < 2:
        raise ValueError("cannot step below level 1")
    eps = max(prec.eps, 1e-15) if prec is not None else 1e-15
    sampler = cache.get(X.dsig) if cache is not None else None
    if sampler is None:
        sampler = RowSampler(X, eps=eps)
        if cache is not None:
            cache[X.dsig] = sampler
    return sampler.draw(rng)


def sample_path(
    X: Configuration,
    rng: np.random.Generator,
    p: Params | None = None,
    prec: Precision | None = None,
    seed: int | None = None,
    cache: dict | None = None,
) -> PathSample:
    levels = [X]
    events = 0
    while levels[-1].level > 1:
        Y, ev = sample_cotransition(levels[-1], rng, p, prec, cache)
        levels.append(Y)
        events += ev
    return PathSample(tuple(levels), seed, events)


def gibbs_weight(path: PathSample, m_top=1, prec: Precision | None = None):
    """m_top times the product of the kernel entries along the path."""
    prec = prec or Precision()
    with prec.context():
        w = mpmath.mpf(m_top) if not isinstance(m_top, mpf) else m_top
        for a, b in zip(path.levels, path.levels[1:]):
            w *= kernel_general(a, b, prec=prec)
        return +w


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class Moment:
    value: mpf
    band: mpf


def normalizer(nu: Sequence[int], K: int, qp: QPair):
    """(t^K; q, t)_nu."""
    _, t = qp.mp()
    return gen_pochhammer(t**K, qp, Partition(nu))


def moment(row: KernelRow, nu: Sequence[int], qp: QPair | None = None, prec: Precision | None = None, level: int | None = None) -> Moment:
    """Sum of weight * P_{nu|K}(Y) / (t^K;q,t)_nu over the atoms of a row.

    The band is tail_bound * M^{|nu|} P_{nu|K}(1,..,1) / (t^K;q,t)_nu with M
    the largest |x| of the source: every target point lies in the hull of
    the source points and P_nu has nonnegative monomial coefficients, so
    this bounds |P_{nu|K}| on every unenumerated atom too.
    """
    nu = Partition(nu)
    prec = prec or Precision()
    qp = qp or row.source.params.qp
    K = level if level is not None else (row.atoms[0][0].level if row.atoms else row.source.level - 1)
    if len(nu) > K:
        raise ValueError(f"l(nu) = {len(nu)} exceeds the level {K}")
    with prec.context():
        norm = normalizer(nu, K, qp)
        total = mpf(0)
        if row.atoms:
            bank = MacdonaldBank([nu], K, qp)
            for Y, w in row.atoms:
                total += w * bank.values(Y.values())[0]
        big = max((abs(v) for v in row.source.values()), default=mpf(1))
        bound = big ** nu.size * mac_eval(nu, [1] * K, qp) / abs(norm)
        return Moment(+(total / norm), +(mpf(row.tail_bound) * bound))


def moments(row: KernelRow, nus: Sequence[Sequence[int]], qp: QPair | None = None, prec: Precision | None = None) -> list[Moment]:
    """Several moments of one row, sharing the monomial tables."""
    prec = prec or Precision()
    qp = qp or row.source.params.qp
    K = row.atoms[0][0].level if row.atoms else row.source.level - 1
    nus = [Partition(nu) for nu in nus]
    with prec.context():
        bank = MacdonaldBank(nus, K, qp)
        sums = [mpf(0)] * len(nus)
        for Y, w in row.atoms:
            vals = bank.values(Y.values())
            sums = [s + w * v for s, v in zip(sums, vals)]
        big = max((abs(v) for v in row.source.values()), default=mpf(1))
        out = []
        for nu, s in zip(nus, sums):
            norm = normalizer(nu, K, qp)
            bound = big ** nu.size * mac_eval(nu, [1] * K, qp) / abs(norm)
            out.append(Moment(+(s / norm), +(mpf(row.tail_bound) * bound)))
        return out


def boundary_row(
    Xinf: InfiniteConfiguration,
    K: int,
    N_approx: int,
    p: Params | None = None,
    prec: Precision | None = None,
    prune: float = 0.0,
    engine: str = "mp",
) -> KernelRow:
    """Lambda^{N_approx}_K applied to the N_approx largest points of X_inf."""
    if N_approx <= K:
        raise ValueError("N_approx must exceed K")
    if p is not None and p != Xinf.params:
        raise ValueError("params mismatch")
    return kernel_compose(Xinf.prefix(N_approx), K, prec=prec, prune=prune, engine=engine)


def boundary_table(
    Xinf: InfiniteConfiguration,
    K: int,
    N_list: Sequence[int],
    nus: Sequence[Sequence[int]],
    prec: Precision | None = None,
    prune: float = 0.0,
    engine: str = "mp",
) -> list[dict]:
    """Rows (nu, K, N_approx, moment, error_band) for a moment table."""
    out = []
    for N in N_list:
        row = boundary_row(Xinf, K, N, prec=prec, prune=prune, engine=engine)
        for nu, m in zip(nus, moments(row, nus, prec=prec)):
            out.append({"nu": tuple(Partition(nu)), "K": K, "N_approx": N, "moment": m.value, "error_band": m.band})
    return out


# ---------------------------------------------------------------------------
# coherent systems


@dataclass
class CoherentSystem:
    """Measures M_N, M_{N-1}, ... obtained by pushing a top measure down."""

    params: Params
    measures: dict = field(default_factory=dict)  # level -> {dsig: weight}
    deficits: dict = field(default_factory=dict)  # level -> accumulated tail

    @classmethod
    def from_top(cls, top: dict, params: Params, down_to: int = 1, prec: Precision | None = None) -> "CoherentSystem":
        from .kernels import kernel_row

        prec = prec or Precision()
        levels = {dsig.level for dsig in top}
        if len(levels) != 1:
            raise ValueError("top measure must live on a single level")
        N = levels.pop()
        system = cls(params, {N: dict(top)}, {N: mpf(0)})
        for level in range(N, down_to, -1):
            nxt: dict = {}
            deficit = system.deficits[level]
            with prec.context():
                for a, w in system.measures[level].items():
                    row = kernel_row(Configuration(params, a), prec=prec)
                    deficit += w * row.tail_bound
                    for Y, v in row.atoms:
                        nxt[Y.dsig] = nxt.get(Y.dsig, 0) + w * v
            system.measures[level - 1] = nxt
            system.deficits[level - 1] = deficit
        return system

    def total(self, level: int):
        return sum(self.measures[level].values(), mpf(0))
