import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qtchain import _core_py, core
from qtchain.kernels import (
    dixon_anderson,
    extended_kernel_row,
    float_entries,
    inserted_configuration,
    kernel_compose,
    kernel_general,
    kernel_row,
    kernel_row_float,
    kernel_special,
    kernel_tau_one,
    r_function,
    r_function_direct,
    r_function_theta,
    r_values_theta,
    split_first_factor,
    vandermonde,
)
from qtchain.lattice import PLUS, Configuration, Params, cotransitions, gaps, random_dsig, sparse_interlace
from qtchain.qcalc import Precision, norm_constants, qpoch_finite, qpoch_infinite
from qtchain.shapes import DoubleSignature, Signature

from conftest import config

PREC = Precision(40, eps=1e-20)


def stochastic_error(row):
    with PREC.context():
        return abs(row.total() + row.tail_bound - 1)


class TestRFunction:
    @given(st.integers(0, 10_000))
    def test_two_routes_agree(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(2, 5))
        p = Params.make("0.5", "0.37", zeta_plus=Fraction(5, 4), zeta_minus=Fraction(-3, 5))
        X = Configuration(p, random_dsig(rng, N, -2, 2))
        targets = cotransitions(X, 2)
        _, word, ms = targets[int(rng.integers(0, len(targets)))]
        with PREC.context():
            a = r_function(X, word, ms, prec=PREC)
            b = r_function_direct(X, word, ms, prec=PREC)
            assert abs(a - b) <= mpmath.mpf(10) ** -30 * max(1, abs(b))

    @given(st.integers(0, 10_000))
    def test_theta_route_agrees_with_direct(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(2, 5))
        p = Params.make("0.6", "0.41", zeta_plus=Fraction(3, 2), zeta_minus=Fraction(-2, 7))
        X = Configuration(p, random_dsig(rng, N, -2, 2))
        targets = cotransitions(X, 2)
        _, word, ms = targets[int(rng.integers(0, len(targets)))]
        with PREC.context():
            a = r_function_theta(X, word, ms, prec=PREC)
            b = r_function_direct(X, word, ms, prec=PREC)
            assert abs(a - b) <= mpmath.mpf(10) ** -30 * max(1, abs(b))

    @pytest.mark.parametrize("tau", [1, 2, 3])
    @pytest.mark.parametrize("shape", [((2, 0), (1,)), ((1, 1, 0), ()), ((0,), (2, 0)), ((3, 0), (0, 0))], ids=str)
    def test_theta_route_at_resonance(self, tau, shape):
        # the direct product is singular here; compare entries with the special kernel
        X = config("0.5", tau=tau, plus=shape[0], minus=shape[1])
        for Y, word, ms in cotransitions(X, 3):
            with PREC.context():
                _, ct = norm_constants(X.level, X.params.qp, PREC)
                ys, xs = Y.values(), X.values()
                entry = ct * vandermonde(ys) / vandermonde(xs) * mpmath.fprod(abs(y) for y in ys)
                entry *= r_function_theta(X, word, ms, prec=PREC)
                assert abs(entry - kernel_special(X, Y, tau, prec=PREC)) < mpmath.mpf(10) ** -35

    @pytest.mark.parametrize("shape", [((3, 1, 0), (1,)), ((2, 2), (0, -1)), ((1, 0, 0), ())], ids=str)
    def test_split_first_point(self, shape):
        X = config("0.5", "0.3", *shape)
        with PREC.context():
            q, t = X.params.qp.mp()
            xs = X.values()
            for _, word, ms in cotransitions(X, 2):
                if word[0] != 0:
                    continue
                whole = r_values_theta(xs, word, ms, q, t, PREC)
                rest = r_values_theta(xs[1:], word[1:], ms[1:], q, t, PREC)
                factor = split_first_factor(xs, word, ms, q, t, PREC)
                assert abs(whole / rest - factor) < mpmath.mpf(10) ** -35 * factor

    def test_split_needs_infinite_block_only_once(self):
        # taking (x_j t/x_1;q)_inf for every j >= 2 overshoots whenever some m_r > 0 with r >= 2
        X = config("0.5", "0.3", (3, 1, 0), (1,))
        word, ms = (0, 0, 0), (1, 0, 2)
        with PREC.context():
            q, t = X.params.qp.mp()
            xs = X.values()
            m1 = ms[0]
            all_infinite = qpoch_infinite(q ** (m1 + 1), q) / qpoch_infinite(q**m1 * t, q)
            for x in xs[1:]:
                all_infinite *= qpoch_finite(xs[0] * t / x, q, m1) / qpoch_finite(xs[0] * q / x, q, m1)
                all_infinite *= qpoch_infinite(x * t / xs[0], q) / qpoch_infinite(x * q / xs[0], q)
            factor = split_first_factor(xs, word, ms, q, t, PREC)
            assert abs(all_infinite / factor - 1) > 1e-3

    def test_direct_refuses_resonant_t(self):
        X = config("0.5", tau=2, plus=(1,), minus=(0,))
        with pytest.raises(ValueError):
            r_function_direct(X, (0,), (0,), prec=PREC)

    def test_rejects_non_admissible(self):
        X = config("0.5", "0.3", (2, 0))
        with pytest.raises(ValueError):
            r_function(X, (0,), (5,), prec=PREC)


class TestRows:
    @pytest.mark.parametrize(
        "X",
        [
            config("0.5", "0.3", (1, 0), (2, 1), zp=Fraction(3, 2), zm=Fraction(-2, 7)),
            config("0.2", "0.8", (2, 0, 0)),
            config("0.8", "0.2", (), (1, 1, -1)),
            config("0.5", tau=2, plus=(1,), minus=(0,)),
            config("0.8", "0.8", (0,), (0, 0)),
        ],
        ids=["two_sided", "plus_only", "minus_only", "tau2", "q_eq_t"],
    )
    def test_stochastic_and_nonnegative(self, X):
        row = kernel_row(X, prec=PREC)
        assert stochastic_error(row) < 1e-18
        assert all(w >= 0 for _, w in row.atoms)

    def test_tau_one_example(self):
        # X = {1, q} at t = q: all mass sits on y = 1
        X = config("0.5", tau=1, plus=(0, 0))
        row = kernel_row(X, prec=PREC)
        d = row.as_dict()
        with PREC.context():
            assert abs(d[DoubleSignature(Signature((0,)), Signature())] - 1) < mpmath.mpf(10) ** -35
            assert abs(d.get(DoubleSignature(Signature((-1,)), Signature()), 0)) < mpmath.mpf(10) ** -35

    def test_truncated_row_reports_tail(self):
        X = config("0.5", "0.3", (1,), (1,))
        row = kernel_row(X, prec=PREC, m_max=1)
        with PREC.context():
            assert row.tail_bound > 0.01
            assert row.total() + row.tail_bound >= 1

    def test_rows_match_entrywise(self, two_sided):
        row = kernel_row(two_sided, prec=PREC)
        with PREC.context():
            for Y, w in row.atoms[:25]:
                assert abs(kernel_general(two_sided, Y, prec=PREC) - w) < mpmath.mpf(10) ** -35

    def test_non_interlacing_entry_is_zero(self, two_sided):
        Y = Configuration(two_sided.params, DoubleSignature(Signature((5, 0)), Signature((1,))))
        assert kernel_general(two_sided, Y, prec=PREC) == 0

    def test_json_uses_decimal_strings(self, two_sided):
        row = kernel_row(two_sided, prec=PREC)
        with PREC.context():
            obj = json.loads(json.dumps(row.to_json()))
        assert isinstance(obj["atoms"][0]["weight"], str)
        float(obj["tail_bound"])


class TestSpecialKernels:
    @pytest.mark.parametrize("tau", [1, 2, 3])
    @pytest.mark.parametrize("shape", [((1, 0), (0,)), ((2,), (1, -1)), ((0, -1, -2), ())], ids=str)
    def test_special_equals_general(self, tau, shape):
        X = config("0.6", tau=tau, plus=shape[0], minus=shape[1])
        prec = Precision(50)
        row = kernel_row(X, prec=prec, m_max=8)
        with prec.context():
            for Y, w in row.atoms:
                s = kernel_special(X, Y, tau, prec=prec)
                assert abs(s - w) < mpmath.mpf(10) ** -40
                if tau == 1:
                    assert abs(kernel_tau_one(X, Y, prec) - w) < mpmath.mpf(10) ** -40

    def test_tau_must_match(self):
        X = config("0.5", "0.3", (1,), (0,))
        Y = Configuration(X.params, DoubleSignature(Signature((1,)), Signature()))
        with pytest.raises(ValueError):
            kernel_special(X, Y, 2, prec=PREC)


class TestFloatCore:
    def test_float_matches_mp(self, two_sided):
        exact = kernel_row(two_sided, prec=PREC).as_dict()
        approx = kernel_row_float(two_sided, 1e-14).as_dict()
        with PREC.context():
            worst = max(abs(float(exact.get(k, 0)) - float(v)) for k, v in approx.items())
        assert worst < 1e-13

    @pytest.mark.skipif(core.BACKEND != "cython", reason="compiled core not built")
    @pytest.mark.parametrize("shape", [((1, 0), (2, 1)), ((2, 0, 0), ()), ((), (0, -1)), ((3, 1), (0,))], ids=str)
    def test_compiled_matches_fallback(self, shape):
        from qtchain import _core

        X = config("0.5", "0.3", shape[0], shape[1], zp=Fraction(3, 2), zm=Fraction(-1, 2))
        q, t = X.params.qp.floats()
        ct = _core_py.poch_inf(t, q) ** X.level / (_core_py.poch_inf(t**X.level, q) * _core_py.poch_inf(q, q) ** (X.level - 1))
        args = (X.float_values(), X.k, gaps(X), q, t, ct, 1e-14)
        a, ta = _core.row_float(*args)
        b, tb = _core_py.row_float(*args)
        assert [(e, m) for e, m, _ in a] == [(e, m) for e, m, _ in b]
        assert max(abs(x[2] - y[2]) for x, y in zip(a, b)) < 1e-15
        assert abs(ta - tb) < 1e-20

    def test_tiny_points_do_not_overflow(self):
        # a point far below the others used to overflow the H products in doubles
        X = config("0.5", "0.3", (1,), (0, -43), zm=Fraction(-1, 2))
        entries, tail = float_entries(X, 1e-3)
        assert np.isfinite(tail) and len(entries) < 10_000


class TestCompose:
    def test_two_step_by_hand(self):
        X = config("0.5", "0.3", (2, 1, 0))
        composed = kernel_compose(X, 1, prec=PREC).as_dict()
        manual = {}
        with PREC.context():
            for Y, w in kernel_row(X, prec=PREC).atoms:
                for Z, v in kernel_row(Y, prec=PREC).atoms:
                    manual[Z.dsig] = manual.get(Z.dsig, 0) + w * v
            assert set(manual) == set(composed)
            assert max(abs(manual[k] - composed[k]) for k in manual) < mpmath.mpf(10) ** -35

    def test_mass_and_engines(self):
        X = config("0.5", "0.3", (1, 0), (0,), zm=Fraction(-1, 2))
        mp_row = kernel_compose(X, 1, prec=Precision(30, eps=1e-15))
        fl_row = kernel_compose(X, 1, prec=Precision(30, eps=1e-15), engine="float")
        with PREC.context():
            assert abs(mp_row.total() + mp_row.tail_bound - 1) < 1e-14
            a, b = mp_row.as_dict(), fl_row.as_dict()
            assert max(abs(a[k] - b.get(k, 0)) for k in a) < 1e-12

    def test_bad_level(self, two_sided):
        with pytest.raises(ValueError):
            kernel_compose(two_sided, 4)
        with pytest.raises(ValueError):
            kernel_compose(two_sided, 2, engine="gpu")


class TestExtended:
    def test_insertion(self):
        Xs = config("0.5", "0.3", (1,), (0,))
        XA, side, row = inserted_configuration(Xs, 4, 10)
        assert XA.level == 4 and XA.k == 3 and side == PLUS and row == 1
        assert XA.dsig.plus == (1, -9, -9)

    def test_needs_lower_level(self):
        Xs = config("0.5", "0.3", (1,), (0,))
        with pytest.raises(ValueError):
            extended_kernel_row(Xs, 2, 10, prec=PREC)

    @pytest.mark.parametrize("shape,N", [(((1,), (0,)), 3), (((0,), ()), 3), (((), (1, 0)), 4)], ids=str)
    def test_violating_mass_decays(self, shape, N):
        Xs = config("0.5", "0.3", shape[0], shape[1])
        r20 = extended_kernel_row(Xs, N, 20, prec=PREC)
        r40 = extended_kernel_row(Xs, N, 40, prec=PREC)
        with PREC.context():
            assert r40.violating_mass() < 1e-6
            assert r40.violating_mass() < r20.violating_mass() or r20.violating_mass() == 0
            assert abs(r40.total() + r40.tail_bound - 1) < 1e-15
        for (Y, _), ok in zip(r40.atoms, r40.compliant):
            if ok:
                assert sparse_interlace(Xs, Y)


class TestDixonAnderson:
    @pytest.mark.parametrize("tau", [1, 2, 3])
    def test_normalized_n2(self, tau):
        with mpmath.workdps(20):
            total = mpmath.quad(lambda y: dixon_anderson([1, -1], [y], tau), [-1, 1])
        assert abs(total - 1) < 1e-12

    def test_normalized_n3(self):
        xs = [2, 0.5, -1]
        with mpmath.workdps(15):
            total = mpmath.quad(lambda a, b: dixon_anderson(xs, [a, b], 2), [0.5, 2], [-1, 0.5])
        assert abs(total - 1) < 1e-8

    def test_interlacing_required(self):
        with pytest.raises(ValueError):
            dixon_anderson([1, -1], [2], 1)


def test_vandermonde_sign():
    assert vandermonde([3, 2, 1]) == 2
    assert vandermonde([1, 2]) == -1
