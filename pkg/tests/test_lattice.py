from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qtchain.lattice import (
    MINUS,
    PLUS,
    Configuration,
    InfiniteConfiguration,
    LatticeNode,
    Params,
    admissible_pair,
    admissible_word,
    cotransitions,
    default_m_max,
    dsig_from_config,
    gaps,
    interlace_config,
    q_interval,
    random_dsig,
    sparse_interlace,
    target_dsig,
)
from qtchain.qcalc import Precision
from qtchain.shapes import DoubleSignature, InfiniteDoubleSignature, SideSequence, Signature, interlace_double

from conftest import config


class TestParams:
    def test_exact_and_json(self):
        p = Params.make("0.5", tau=2, zeta_plus="1.5", zeta_minus="-0.25")
        assert p.qp.t == Fraction(1, 4)
        assert Params.from_json(p.to_json()) == p

    @pytest.mark.parametrize("zp,zm", [(0, -1), (1, 0), (-1, -1)])
    def test_zeta_signs(self, zp, zm):
        with pytest.raises(ValueError):
            Params.make("0.5", "0.5", zeta_plus=zp, zeta_minus=zm)

    def test_t_or_tau(self):
        with pytest.raises(ValueError):
            Params.make("0.5")
        with pytest.raises(ValueError):
            Params.make("0.5", "0.25", tau=2)


class TestConfiguration:
    def test_values_descending(self):
        X = config("0.5", "0.25", (1, 0), (2, 1), zp=2, zm=-1)
        with mpmath.workdps(30):
            vals = X.values()
        # plus rows 1..k then minus rows l..1
        assert [float(v) for v in vals] == [4.0, 0.5, -0.5, -4.0]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_json_roundtrip(self, two_sided):
        assert Configuration.from_json(two_sided.to_json()) == two_sided
        assert dsig_from_config(two_sided) == two_sided.dsig

    def test_gaps(self):
        X = config("0.5", "0.3", (3, 1, 1), (2, 0))
        assert gaps(X) == [2, 0, None, 2]
        assert gaps(config("0.5", "0.3", (), (2, 0, -1))) == [1, 2]


class TestAdmissibility:
    def test_word(self):
        assert admissible_word(4, 2, 1) == (0, 1, 1)
        assert admissible_word(3, 0, None) == (1, 1)

    @given(st.integers(0, 10_000))
    def test_cotransitions_interlace_and_invert(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(2, 5))
        X = Configuration(Params.make("0.5", "0.3"), random_dsig(rng, N, -2, 2))
        for Y, word, ms in cotransitions(X, 2):
            assert interlace_double(X.dsig, Y.dsig)
            assert interlace_config(X, Y)
            assert admissible_pair(X, Y) == (word, ms)

    def test_count_one_sided(self):
        # no straddle: prod (l_r + 1) targets
        X = config("0.5", "0.3", (3, 1, 0))
        assert len(cotransitions(X, 5)) == 3 * 2

    def test_count_straddle(self):
        X = config("0.5", "0.3", (1,), (0,))
        assert len(cotransitions(X, 4)) == 2 * 5

    def test_non_interlacing(self):
        X = config("0.5", "0.3", (1, 0))
        Y = Configuration(X.params, DoubleSignature(Signature((2,)), Signature()))
        assert admissible_pair(X, Y) is None
        assert admissible_pair(X, X) is None

    def test_target_dsig(self):
        a = DoubleSignature(Signature((2, 0)), Signature((1, 1)))
        assert target_dsig(a, 0, (1, 3, 0)) == DoubleSignature(Signature((1, -3)), Signature((1,)))
        assert target_dsig(a, 1, (1, 3, 0)) == DoubleSignature(Signature((1,)), Signature((1, -2)))

    def test_default_m_max(self):
        p = Params.make("0.5", "0.25")
        M = default_m_max(p, Precision(30, eps=1e-10))
        assert 0.5**M < 1e-10 / 0.5


class TestQInterval:
    def test_finite_plus(self):
        p = Params.make("0.5", tau=2)
        I = q_interval(LatticeNode(PLUS, 5), LatticeNode(PLUS, 1), 2, p)
        assert [n.n for n in I] == [1, 2, 3]

    def test_finite_minus(self):
        p = Params.make("0.5", tau=2)
        I = q_interval(LatticeNode(MINUS, 1), LatticeNode(MINUS, 4), 2, p)
        assert [n.n for n in I] == [2, 1]

    def test_infinite(self):
        p = Params.make("0.5", tau=1)
        I = q_interval(LatticeNode(MINUS, 0), LatticeNode(PLUS, 0), 1, p)
        first = [next(iter(I)) for _ in range(1)]
        assert I.infinite and first[0] == LatticeNode(PLUS, 0)

    def test_separation(self):
        p = Params.make("0.5", tau=3)
        with pytest.raises(ValueError):
            q_interval(LatticeNode(PLUS, 2), LatticeNode(PLUS, 0), 3, p)


class TestSparseInterlace:
    def test_equal_level(self):
        X = config("0.5", "0.3", (2, 0), (1,))
        Y = Configuration(X.params, DoubleSignature(Signature((1, -5)), Signature((0,))))
        assert sparse_interlace(X, Y)
        Z = Configuration(X.params, DoubleSignature(Signature((3, 0)), Signature((0,))))
        assert not sparse_interlace(X, Z)

    def test_level_mismatch(self):
        X = config("0.5", "0.3", (2, 0))
        with pytest.raises(ValueError):
            sparse_interlace(X, config("0.5", "0.3", (2,)))


class TestInfinite:
    def test_prefix_picks_largest(self):
        p = Params.make("0.5", "0.3", zeta_plus=1, zeta_minus=Fraction(-1, 2))
        Xi = InfiniteConfiguration(InfiniteDoubleSignature(SideSequence((1, 0), "constant"), SideSequence((0,), "constant")), p)
        X = Xi.prefix(4)
        assert X.dsig == DoubleSignature(Signature((1, 0)), Signature((0, 0)))

    def test_truncated(self):
        p = Params.make("0.5", "0.5")
        Xi = InfiniteConfiguration(InfiniteDoubleSignature(SideSequence((0,), "constant"), SideSequence()), p, delta=1e-3)
        assert Xi.truncated().level == 10  # 2^-9 > 1e-3 > 2^-10
