from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from qtchain.lattice import Configuration, Params
from qtchain.qcalc import Precision
from qtchain.shapes import DoubleSignature, Signature

settings.register_profile("qtchain", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qtchain")


def config(q, t=None, plus=(), minus=(), tau=None, zp=1, zm=-1) -> Configuration:
    p = Params.make(q, t, tau=tau, zeta_plus=zp, zeta_minus=zm)
    return Configuration(p, DoubleSignature(Signature(plus), Signature(minus)))


@pytest.fixture
def prec():
    return Precision(50)


@pytest.fixture
def fast_prec():
    return Precision(30, eps=1e-15)


@pytest.fixture
def two_sided():
    return config("0.5", "0.3", (1, 0), (2, 1), zp=Fraction(3, 2), zm=Fraction(-2, 7))
