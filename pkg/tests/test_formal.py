from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qborel.euler import EulerFactor, euler_coeffs
from qborel.formal import as_order, check_commutation, qborel_formal, qlaplace_formal
from qborel.qcore import FormalSeries, QContext

CTX = QContext(2.0)


def test_borel_of_euler_is_geometric():
    b = qborel_formal(euler_coeffs(EulerFactor(1), CTX, 10), CTX, 1)
    assert np.allclose(b.coefficients, [(-1) ** n for n in range(11)])


def test_low_coefficients_fixed():
    f = FormalSeries([3, -2j], 1)
    assert qborel_formal(f, CTX, Fraction(3, 2)).allclose(f)


def test_laplace_of_geometric():
    g = FormalSeries([(-1) ** n for n in range(4)], 3)
    assert np.allclose(qlaplace_formal(g, CTX, 1).coefficients, [1, -1, 2, -8])
    z = FormalSeries.zero(5)
    assert np.all(qlaplace_formal(z, CTX).coefficients == 0)


def test_order_rescales_base():
    rng = np.random.default_rng(3)
    f = FormalSeries(rng.normal(size=12), 11)
    a = qborel_formal(f, QContext(4.0), 2).coefficients
    b = qborel_formal(f, QContext(2.0), 1).coefficients
    assert np.allclose(a, b, rtol=1e-14)


def test_as_order():
    assert as_order(0.5) == Fraction(1, 2)
    assert as_order("2/3") == Fraction(2, 3)
    with pytest.raises(ValueError):
        as_order(0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=15),
       st.sampled_from([1, 2, Fraction(1, 2), Fraction(2, 3), 3]))
def test_round_trip(c, k):
    f = FormalSeries(c, len(c) - 1)
    assert qlaplace_formal(qborel_formal(f, CTX, k), CTX, k).allclose(f, rtol=1e-12, atol=1e-300)
    assert qborel_formal(qlaplace_formal(f, CTX, k), CTX, k).allclose(f, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("which", ["borel", "laplace"])
@pytest.mark.parametrize("j", [0, 1, 2])
@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_commutation(which, j, m):
    rng = np.random.default_rng(j * 10 + m + 50)
    f = FormalSeries(rng.normal(size=14) + 1j * rng.normal(size=14), 13)
    assert check_commutation(j, m, f, QContext(3.0), which) < 1e-12


def test_commutation_examples():
    e = euler_coeffs(EulerFactor(1), CTX, 12)
    assert check_commutation(0, 1, e, CTX) < 1e-15
    assert check_commutation(1, 0, e, CTX) < 1e-14
