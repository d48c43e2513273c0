import math

import mpmath
import numpy as np
import pytest

from qborel.errors import SingularDirection, ZeroParameter
from qborel.euler import (EulerFactor, borel_decay_scan, euler_borel, euler_coeffs, euler_residual,
                          euler_sum, functional_residual, geometric_bound_sum, bound_ratio,
                          singular_directions, spiral_inverse_scan, stokes_jump,
                          stokes_n_deviation)
from qborel.formal import qborel_formal
from qborel.qcore import LogPoint, QContext

CTX = QContext(2.0)
TWO_PI = 2 * math.pi


@pytest.mark.parametrize("a,m,N,expected", [
    (1, 0, 3, [1, -1, 2, -8]),
    (2, 0, 3, [0.5, -0.25, 0.25, -0.5]),
    (1, 1, 2, [-1, 2, -6]),
])
def test_coefficients(a, m, N, expected):
    c = euler_coeffs(EulerFactor(a, m), CTX, N)
    assert np.allclose(c.coefficients, expected, rtol=1e-15)


def test_factor_validation():
    with pytest.raises(ZeroParameter):
        EulerFactor(0)
    with pytest.raises(ValueError):
        EulerFactor(1, -1)
    with pytest.raises(ValueError):
        euler_coeffs(EulerFactor(1), CTX, -1)


@pytest.mark.parametrize("a", [1, 2, -0.5 + 2j])
def test_coefficients_solve_equation(a):
    assert euler_residual(euler_coeffs(EulerFactor(a), CTX, 12), a, CTX) < 1e-14


@pytest.mark.parametrize("m,expected", [(0, 1.0), (1, -1.0), (2, 2.0), (3, -6.0)])
def test_borel_at_zero(m, expected):
    assert euler_borel(EulerFactor(1, m))(np.array([-50.0 + 0j]))[0] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("m", range(4))
@pytest.mark.parametrize("a", [1, 2, 1 - 1j])
def test_formal_borel_matches_closed_form(m, a):
    N = 10
    b = qborel_formal(euler_coeffs(EulerFactor(a, m), CTX, N), CTX, 1).coefficients
    # Taylor coefficients of (-1)^m m! (xi + a)^{-m-1}
    n = np.arange(N + 1)
    binom = np.array([math.comb(m + j, m) for j in n], dtype=float)
    t = (-1) ** m * math.factorial(m) * binom * (-1.0) ** n / complex(a) ** (n + m + 1)
    assert np.allclose(b, t, rtol=1e-10, atol=0)


@pytest.mark.parametrize("a,angle", [(1, math.pi), (-1, 0.0), (1j, -math.pi / 2)])
def test_singular_directions(a, angle):
    s = singular_directions([EulerFactor(a)])
    assert s.contains(angle)
    assert s.contains(angle + 4 * math.pi)
    assert not s.contains(angle + 0.5)


def test_sum_functional_equation():
    assert functional_residual(EulerFactor(1), 0.0, CTX, LogPoint(0.1, 0.0)) < 1e-7
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = complex(*rng.uniform(-2, 2, 2))
        d = float(rng.uniform(-1, 1))
        if singular_directions([EulerFactor(a)]).contains(d, tol=0.2):
            d += 0.5
        x = LogPoint(float(rng.uniform(0.01, 0.1)), float(rng.uniform(-1, 1)))
        assert functional_residual(EulerFactor(a), d, CTX, x) < 1e-6


def test_sum_asymptotic():
    c = euler_coeffs(EulerFactor(1), CTX, 9).coefficients.real
    x = 0.05
    s = euler_sum(EulerFactor(1), 0.0, CTX, LogPoint(x, 0.0))
    assert abs(s - sum(c[n] * x ** n for n in range(9))) <= 2 * abs(c[9] * x ** 9)


def test_sum_direction_independence():
    x = LogPoint(0.1, 0.2)
    assert abs(euler_sum(EulerFactor(1), 0.3, CTX, x) - euler_sum(EulerFactor(1), 0.6, CTX, x)) < 1e-8


def test_singular_direction_rejected():
    with pytest.raises(SingularDirection):
        euler_sum(EulerFactor(1), math.pi, CTX, LogPoint(0.1, 0.0))
    with pytest.raises(SingularDirection):
        stokes_jump(EulerFactor(1), math.pi, 4.0, CTX, LogPoint(1, 0))


def test_derivative_matches_finite_difference():
    x, h = LogPoint(0.08, 0.1), 1e-4
    d1 = euler_sum(EulerFactor(1, 1), 0.0, CTX, x)
    fd = (euler_sum(EulerFactor(1 + h), 0.0, CTX, x) - euler_sum(EulerFactor(1 - h), 0.0, CTX, x)) / (2 * h)
    assert abs(d1 - fd) < 1e-4 * abs(d1)


def test_no_jump_without_pole():
    assert stokes_jump(EulerFactor(1), 0.1, 0.9, CTX, LogPoint(1, 0)) == 0


@pytest.mark.parametrize("theta", [math.pi / 4, 0.0, -0.5, 1.0, 2.0])
def test_jump_against_two_quadratures(theta):
    x = LogPoint(1.0, theta)
    fac = EulerFactor(1)
    pred = stokes_jump(fac, 0.0, TWO_PI, CTX, x)
    direct = euler_sum(fac, 0.0, CTX, x, method="quadrature") - euler_sum(fac, TWO_PI, CTX, x, method="quadrature")
    assert abs(pred - direct) < 1e-6 * max(1.0, abs(pred))


def test_jump_closed_form_for_a_equal_one():
    # the residue at xi = e^{-pi i} gives S^0 - S^{2pi} = -i sqrt(2pi/L) exp(-w^2/(2L));
    # the two-quadrature test above fixes the sign
    x = LogPoint(1.0, math.pi / 4)
    L = CTX.logq
    w = x.log - 1j * math.pi - 0.5 * L
    closed = -math.sqrt(TWO_PI / L) * 1j * np.exp(-w * w / (2 * L))
    assert abs(stokes_jump(EulerFactor(1), 0.0, TWO_PI, CTX, x) - closed) < 1e-12 * abs(closed)


def test_jump_antisymmetry():
    fac, x = EulerFactor(2 - 1j), LogPoint(0.7, 0.4)
    assert stokes_jump(fac, 0.0, 5.0, CTX, x) == -stokes_jump(fac, 5.0, 0.0, CTX, x)


@pytest.mark.parametrize("N", [1, 2, 3, -1, -2])
def test_multi_sheet_reduction(N):
    dev, _, _ = stokes_n_deviation(N, LogPoint(1.0, math.pi / 4 + TWO_PI * N), CTX)
    assert dev < 1e-6


def test_sheet_shift():
    fac, x = EulerFactor(1), LogPoint(0.3, 0.2)
    a = euler_sum(fac, TWO_PI, CTX, x.rotate(TWO_PI), method="quadrature")
    b = euler_sum(fac, 0.0, CTX, x)
    assert abs(a - b) < 1e-9


def test_geometric_bound_sum():
    lam, r0 = 0.7, 0.3 + 0.1j
    assert geometric_bound_sum(1, r0, lam) == mpmath.exp(lam * (1 + mpmath.mpc(0.3, 0.1)) ** 2)
    assert 0.9 < bound_ratio(5, 0.0, 1.0) < 1.2
    with pytest.raises(ValueError):
        geometric_bound_sum(0, 0.0, 1.0)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("r0", [-0.5, -0.2, 0.0, 0.25, 0.49])
def test_bound_ratio_bounded_and_converging(lam, r0):
    ratios = [bound_ratio(N, r0, lam) for N in range(5, 51)]
    assert all(0.5 <= v <= 2.0 for v in ratios)
    assert abs(ratios[-1] - ratios[-2]) < 1e-12


def test_spiral_scan_base_and_reduction():
    rows = spiral_inverse_scan(CTX, 0.5, [0.0, TWO_PI])
    s0 = euler_sum(EulerFactor(1), 0.0, CTX, LogPoint(0.5, 0.0))
    assert rows[0].N == 0
    assert rows[0].bound_quantity == pytest.approx(-math.log(abs(s0)), rel=1e-12)
    dev, _, _ = stokes_n_deviation(1, LogPoint(0.5, TWO_PI), CTX)
    assert dev < 1e-6
    with pytest.raises(ValueError):
        spiral_inverse_scan(CTX, 0.5, [])


def test_spiral_scan_shifted_bound():
    # 1/S decays like exp(-(|t| - pi)^2 / (2 log q)): the nearest pole of the
    # correction sum sits half a turn away from the base sheet
    ts = [0.0, TWO_PI, -TWO_PI, 2 * TWO_PI, -2 * TWO_PI, 3 * TWO_PI, -3 * TWO_PI]
    rows = spiral_inverse_scan(CTX, 0.5, ts)
    ref = rows[0].shifted_quantity
    assert all(r.shifted_quantity <= ref + 3.0 for r in rows)
    far = [r.shifted_quantity for r in rows[1:]]
    assert max(far) - min(far) < 1e-3
    # the t^2 form keeps growing by about pi^2 / log q per turn
    growth = [r.bound_quantity for r in rows if r.t > 0]
    assert all(b - a > 20 for a, b in zip(growth, growth[1:]))


def test_borel_decay_exponent():
    t = np.linspace(-4, 4, 9)
    rep = borel_decay_scan(1, 1.0, CTX, 1.0, t)
    assert rep.measured_sigma == pytest.approx(rep.convolution_sigma, rel=0.05)
    assert abs(rep.measured_sigma - rep.additive_sigma) > 1.0


@pytest.mark.parametrize("N", [1, 2])
def test_multi_sheet_reduction_sign(N):
    # with the correction added (a + for N > 0) the reduction is far off
    dev, _, _ = stokes_n_deviation(N, LogPoint(1.0, math.pi / 4 + TWO_PI * N), CTX, plus_sign=True)
    assert dev > 1.0
