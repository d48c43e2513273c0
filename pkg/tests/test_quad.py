import math
from fractions import Fraction

import numpy as np
import pytest

from qborel.checks import moment_errors
from qborel.errors import NonFinite, WindowExhausted
from qborel.euler import EulerFactor, euler_coeffs, euler_sum_function
from qborel.formal import qborel_formal
from qborel.kernel import log_eq
from qborel.qcore import FormalSeries, LogPoint, QContext
from qborel.quad import (DEFAULT_CONFIG, LogFunction, QuadratureConfig, borel_numeric,
                         choose_borel_radius, fit_quadratic, growth_scan, laplace_numeric,
                         monomial, on_plane)

CTX = QContext(2.0)
GEOM = on_plane(lambda xi: 1.0 / (1.0 + xi), radius=1.0)


@pytest.mark.parametrize("q", [1.5, 2.0, 4.0])
@pytest.mark.parametrize("k", [1, 2, Fraction(1, 2)])
@pytest.mark.parametrize("n", range(-3, 7))
def test_moments(q, k, n):
    lap, bor = moment_errors(n, QContext(q), k, LogPoint(0.7, 0.3))
    assert lap < 1e-9
    assert bor < 1e-9


def test_constant_is_fixed():
    x = LogPoint(0.3, 0.4)
    assert abs(laplace_numeric(monomial(0), 0.0, CTX, 1, x) - 1) < 1e-14
    assert abs(borel_numeric(monomial(0), 0.5, CTX, 1, x) - 1) < 1e-14


def test_laplace_asymptotic_to_euler_series():
    x = LogPoint(0.05, 0.0)
    c = euler_coeffs(EulerFactor(1), CTX, 9).coefficients.real
    partial = sum(c[n] * 0.05 ** n for n in range(9))
    val = laplace_numeric(GEOM, 0.0, CTX, 1, x)
    assert abs(val - partial) <= 2 * abs(c[9] * 0.05 ** 9)


def test_borel_of_laplace_round_trip():
    S = euler_sum_function(EulerFactor(1), 0.0, CTX)
    xi = LogPoint(0.3, 0.0)
    got = borel_numeric(S, choose_borel_radius(xi, CTX), CTX, 1, xi)
    assert abs(got - 1 / 1.3) < 1e-7


def test_laplace_of_borel_round_trip():
    # f(x) = 1/(1+x) has the entire Borel transform sum (-1)^n q^{-n(n-1)/2} xi^n;
    # along d = pi all its terms are positive, so it is summed without cancellation
    N = 120
    b = qborel_formal(FormalSeries([(-1) ** n for n in range(N + 1)], N), CTX, 1)
    germ = LogFunction(lambda z: b(np.exp(z)))
    for r in np.linspace(0.05, 0.45, 10):
        x = LogPoint(float(r), math.pi)
        got = laplace_numeric(germ, math.pi, CTX, 1, x)
        assert abs(got - 1 / (1 - r)) < 1e-6


def test_linearity():
    x = LogPoint(0.2, 0.1)
    f, g = monomial(2), GEOM
    both = LogFunction(lambda z: 2 * f(z) - 3j * g(z))
    lhs = laplace_numeric(both, 0.0, CTX, 1, x)
    rhs = 2 * laplace_numeric(f, 0.0, CTX, 1, x) - 3j * laplace_numeric(g, 0.0, CTX, 1, x)
    assert abs(lhs - rhs) < 1e-12


def test_step_halving_convergence():
    x = LogPoint(0.7, 0.3)
    exact = math.exp(3 * 2 / 2 * math.log(2)) * x.value ** 3
    s = math.sqrt(math.log(2))
    errs = []
    for h in (1.2 * s, 0.6 * s):
        cfg = DEFAULT_CONFIG.with_(step=h)
        errs.append(abs(laplace_numeric(monomial(3), 0.0, CTX, 1, x, cfg) / exact - 1))
    assert errs[1] <= errs[0] / 100


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(step=-1)
    with pytest.raises(ValueError):
        QuadratureConfig(tol=2)
    with pytest.raises(ValueError):
        QuadratureConfig(step=1.0, max_window=5.0)


def test_window_exhausted_and_non_finite():
    fast = LogFunction(lambda z: np.exp(np.exp(z.real) * 0 + z.real ** 2))
    with pytest.raises((WindowExhausted, NonFinite)):
        laplace_numeric(fast, 0.0, CTX, 1, LogPoint(1.0, 0.0), DEFAULT_CONFIG.with_(max_window=5.0))
    bad = LogFunction(lambda z: np.full(np.shape(z), np.nan + 0j))
    with pytest.raises(NonFinite):
        laplace_numeric(bad, 0.0, CTX, 1, LogPoint(1.0, 0.0))


def test_growth_scans():
    t = np.linspace(-6, 6, 25)
    kern = LogFunction(lambda z: np.exp(log_eq(z, CTX.logq)))
    coef = growth_scan(kern, "angular-spiral", t, CTX, radius=1.0).quadratic_coefficient()
    assert coef == pytest.approx(1 / (2 * CTX.logq), rel=0.05)
    one = LogFunction(lambda z: np.ones(np.shape(z), dtype=complex))
    assert abs(growth_scan(one, "radial-ray", t, CTX).quadratic_coefficient()) < 1e-12
    with pytest.raises(ValueError):
        growth_scan(one, "angular-spiral", [], CTX)


def test_fit_quadratic():
    t = np.linspace(-1, 1, 9)
    assert np.allclose(fit_quadratic(t, 1 + 2 * t - 3 * t ** 2), [1, 2, -3])
