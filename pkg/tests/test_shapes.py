from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from qtchain.macdonald import macdonald_oracle
from qtchain.qcalc import QPair
from qtchain.shapes import (
    DoubleSignature,
    InfiniteDoubleSignature,
    Partition,
    SideSequence,
    Signature,
    branching_psi,
    dominates,
    interlace_double,
    interlace_sig,
    interlacing_below,
    partitions,
    partitions_upto,
)

signatures = st.lists(st.integers(-5, 5), min_size=1, max_size=5).map(lambda xs: Signature(sorted(xs, reverse=True)))


class TestSignature:
    def test_rejects_increasing(self):
        with pytest.raises(ValueError):
            Signature((0, 1))

    def test_partition_drops_zeros(self):
        assert Partition((2, 1, 0, 0)) == (2, 1)
        assert Partition((2, 1)).size == 3

    def test_partition_negative(self):
        with pytest.raises(ValueError):
            Partition((1, -1))

    def test_boxes_and_padding(self):
        assert list(Partition((2, 1)).boxes()) == [(1, 1), (1, 2), (2, 1)]
        assert Partition((2,)).padded(3) == (2, 0, 0)
        with pytest.raises(ValueError):
            Partition((1, 1, 1)).padded(2)

    @given(signatures, st.integers(-3, 3))
    def test_shift_roundtrip(self, s, c):
        assert s.shifted(c).shifted(-c) == s

    def test_double_signature_json(self):
        a = DoubleSignature(Signature((2, 0)), Signature((1,)))
        assert a.level == 3 and a.k == 2 and a.l == 1
        assert DoubleSignature.from_json(a.to_json()) == a


class TestPartitions:
    @pytest.mark.parametrize("n,count", [(0, 1), (1, 1), (4, 5), (7, 15), (10, 42)])
    def test_counts(self, n, count):
        assert len(partitions(n)) == count

    def test_length_cap(self):
        assert all(len(p) <= 2 for p in partitions(6, 2))
        assert len(partitions_upto(3, 1)) == 4

    def test_dominance(self):
        assert dominates((3,), (2, 1))
        assert not dominates((2, 1, 1), (2, 2))


class TestInterlacing:
    def test_basic(self):
        assert interlace_sig((3, 1, 0), (2, 0))
        assert not interlace_sig((3, 1, 0), (2, 2))
        with pytest.raises(ValueError):
            interlace_sig((1, 0), (1, 0))

    @given(signatures)
    def test_interlacing_below_is_interlacing(self, s):
        lam = Partition([x - min(s) for x in s])
        n = len(s)
        for mu in interlacing_below(lam, n):
            assert interlace_sig(lam.padded(n), mu.padded(n - 1)) if n > 1 else True

    def test_double(self):
        a = DoubleSignature(Signature((2, 0)), Signature((1,)))
        assert interlace_double(a, DoubleSignature(Signature((1,)), Signature((1,))))
        assert interlace_double(a, DoubleSignature(Signature((2, 0)), Signature()))
        assert not interlace_double(a, DoubleSignature(Signature((3,)), Signature((1,))))


class TestSideSequence:
    def test_rules(self):
        assert SideSequence((3, 1), "constant").head(4) == (3, 1, 1, 1)
        assert SideSequence((3,), "arithmetic", 2).head(3) == (3, 1, -1)
        assert SideSequence((2,)).head(3) == (2,)

    @pytest.mark.parametrize("args", [((), "constant", 0), ((1,), "arithmetic", 0), ((1,), "bogus", 0)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            SideSequence(*args)

    def test_infinite_needed(self):
        with pytest.raises(ValueError):
            InfiniteDoubleSignature(SideSequence((1,)), SideSequence())


class TestBranchingPsi:
    @pytest.mark.parametrize("lam", [(2, 1), (3, 1, 1), (2, 2), (4,), (3, 2), (2, 1, 1)])
    @pytest.mark.parametrize("N", [3, 4])
    def test_branching_reassembles(self, lam, N):
        # P_lam(x_1..x_N) = sum_mu psi x_N^{|lam|-|mu|} P_mu(x_1..x_{N-1}),
        # with every P taken from the eigenoperator oracle (no psi inside)
        qp = QPair("0.5", "0.3")
        xs = [mpmath.mpf(v) for v in ("1.3", "-0.4", "0.7", "0.25")[:N]]
        with mpmath.workdps(40):
            lam = Partition(lam)
            if len(lam) > N:
                pytest.skip("l(lam) > N")
            total = mpmath.mpf(0)
            for mu in interlacing_below(lam, N):
                lower = macdonald_oracle(mu, N - 1, qp).evaluate(xs[:-1])
                total += branching_psi(lam.padded(N), mu.padded(N - 1), qp) * xs[-1] ** (lam.size - mu.size) * lower
            assert abs(total - macdonald_oracle(lam, N, qp).evaluate(xs)) < mpmath.mpf(10) ** -30

    def test_shift_invariant(self):
        qp = QPair("0.5", "0.3")
        with mpmath.workdps(30):
            assert branching_psi((2, 0), (1,), qp) == branching_psi((1, -1), (0,), qp)

    def test_not_interlacing(self):
        with pytest.raises(ValueError):
            branching_psi((2, 0), (3,), QPair("0.5", "0.3"))

    def test_t_equals_q_is_one(self):
        # at t = q the Macdonald polynomials are Schur functions and psi = 1
        qp = QPair(Fraction(1, 2), Fraction(1, 2))
        with mpmath.workdps(30):
            assert abs(branching_psi((3, 1, 0), (2, 1), qp) - 1) < mpmath.mpf(10) ** -25
