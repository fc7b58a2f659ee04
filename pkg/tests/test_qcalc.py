from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from qtchain.qcalc import (
    ConvergenceError,
    Precision,
    QPair,
    gen_pochhammer,
    norm_constants,
    qintegral,
    qpoch_finite,
    qpoch_infinite,
    to_fraction,
    to_mpf,
)


def log_sum_oracle(z, q, dps=90):
    """(z;q)_inf as exp(sum log|1 - z q^n|) with the sign tracked separately."""
    with mpmath.workdps(dps):
        z, q = mpmath.mpf(z), mpmath.mpf(q)
        s, sign, zn = mpmath.mpf(0), 1, z
        while abs(zn) > mpmath.mpf(10) ** -(dps + 5):
            f = 1 - zn
            if f < 0:
                sign = -sign
            s += mpmath.log(abs(f))
            zn *= q
        return sign * mpmath.exp(s)


class TestPrecision:
    def test_defaults(self):
        p = Precision(40)
        assert p.eps == 1e-20

    def test_env_default(self, monkeypatch):
        monkeypatch.setenv("QTCHAIN_DPS", "33")
        assert Precision().sig_digits == 33

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv("QTCHAIN_DPS", "many")
        with pytest.raises(ValueError):
            Precision()

    @pytest.mark.parametrize("digits", [0, 14, 20.5])
    def test_rejects_low_or_fractional(self, digits):
        with pytest.raises(ValueError):
            Precision(digits)

    def test_context_sets_guard_digits(self):
        with Precision(40).context():
            assert mpmath.mp.dps == 50


class TestQPair:
    def test_tau_exact(self):
        qp = QPair.from_tau("0.3", 3)
        assert qp.t == Fraction(27, 1000)

    def test_tau_mismatch(self):
        with pytest.raises(ValueError):
            QPair("0.5", "0.26", tau=2)

    @pytest.mark.parametrize("q,t", [("0", "0.5"), ("1", "0.5"), ("0.5", "1.2")])
    def test_range(self, q, t):
        with pytest.raises(ValueError):
            QPair(q, t)

    def test_decimal_strings_are_exact(self):
        assert to_fraction("0.1") == Fraction(1, 10)
        assert to_fraction(" 0.25 ") == Fraction(1, 4)


class TestPochhammer:
    @pytest.mark.parametrize("m", [0, 1, 5])
    def test_finite_matches_rational(self, m):
        q, z = Fraction(1, 3), Fraction(2, 5)
        exact = Fraction(1)
        for n in range(m):
            exact *= 1 - z * q**n
        with mpmath.workdps(50):
            assert abs(qpoch_finite(to_mpf(z), to_mpf(q), m) - to_mpf(exact)) < mpmath.mpf(10) ** -45

    def test_finite_negative_m(self):
        with pytest.raises(ValueError):
            qpoch_finite(0.5, 0.5, -1)

    @pytest.mark.parametrize("q", ["0.2", "0.5", "0.9", "0.99"])
    @pytest.mark.parametrize("z", ["0.3", "-0.7", "-5", "0.999"])
    def test_infinite_vs_log_oracle(self, q, z):
        prec = Precision(50)
        with prec.context():
            got = qpoch_infinite(mpmath.mpf(z), mpmath.mpf(q), prec)
            want = log_sum_oracle(z, q)
            assert abs(got - want) <= mpmath.mpf(10) ** -48 * abs(want)

    @given(st.fractions(min_value=Fraction(-3), max_value=Fraction(3)).filter(lambda z: z != 1),
           st.sampled_from(["0.3", "0.5", "0.7"]))
    def test_infinite_vs_mpmath(self, z, q):
        prec = Precision(40)
        with prec.context():
            got = qpoch_infinite(to_mpf(z), mpmath.mpf(q), prec)
            want = mpmath.qp(to_mpf(z), mpmath.mpf(q))
            assert abs(got - want) <= mpmath.mpf(10) ** -37 * max(1, abs(want))

    @pytest.mark.parametrize("n", [0, 1, 4])
    def test_exact_zero(self, n):
        prec = Precision(50)
        with prec.context():
            q = mpmath.mpf("0.5")
            assert qpoch_infinite(q**-n, q, prec) == 0

    def test_complex_argument(self):
        prec = Precision(30)
        with prec.context():
            z = mpmath.mpc("0.4", "0.9")
            q = mpmath.mpf("0.6")
            assert abs(qpoch_infinite(z, q, prec) - mpmath.qp(z, q)) < mpmath.mpf(10) ** -28

    def test_huge_argument(self):
        with pytest.raises(ConvergenceError):
            qpoch_infinite(mpmath.mpf(10) ** 400, 0.5)

    def test_gen_pochhammer_boxes(self):
        qp = QPair("0.5", "0.25")
        with mpmath.workdps(40):
            q, t = qp.mp()
            z = mpmath.mpf("0.3")
            # boxes of (2,1): (1,1), (1,2), (2,1)
            want = (1 - z) * (1 - z * q) * (1 - z / t)
            assert abs(gen_pochhammer(z, qp, (2, 1)) - want) < mpmath.mpf(10) ** -35
            assert gen_pochhammer(z, qp, ()) == 1


class TestQIntegral:
    @pytest.mark.parametrize("q", ["0.3", "0.8"])
    def test_monomial(self, q):
        # Jackson integral of x over [0, 1] is (1 - q)/(1 - q^2)
        prec = Precision(30)
        with prec.context():
            qq = mpmath.mpf(q)
            got = qintegral(lambda x: x, 0, 1, qq, prec)
            assert abs(got - 1 / (1 + qq)) < mpmath.mpf(10) ** -14

    def test_interval(self):
        prec = Precision(30)
        with prec.context():
            q = mpmath.mpf("0.5")
            got = qintegral(lambda x: 1, -2, 3, q, prec)
            assert abs(got - 5) < mpmath.mpf(10) ** -14


def test_norm_constants_relation():
    prec = Precision(30)
    qp = QPair("0.5", "0.3")
    with prec.context():
        c, ct = norm_constants(3, qp, prec)
        assert abs(ct - c * (1 - mpmath.mpf("0.5")) ** 2) < mpmath.mpf(10) ** -30
        with pytest.raises(ValueError):
            norm_constants(0, qp, prec)
