from fractions import Fraction

import numpy as np
import pytest

from qborel.errors import DegenerateOperator, NotIncreasing, WindowExhausted
from qborel.euler import EulerFactor, euler_borel, euler_sum
from qborel.newton import (morphism_checks, multisum, multisum_stages, newton_polygon,
                           stage_inversion, tilde_sequence)
from qborel.product import ORDER_12, ProductSum, euler_operator, qeuler_carre_operator
from qborel.qcore import FormalSeries, LogPoint, QContext, QDifferenceOperator, series_mul
from qborel.quad import DEFAULT_CONFIG, LogFunction

CTX = QContext(2.0)


@pytest.mark.parametrize("L,vertices,slopes", [
    (qeuler_carre_operator(1, 2, CTX), ((0, 0), (2, 2), (3, 4)), (1, 2)),
    (euler_operator(1), ((0, 0), (1, 1)), (1,)),
    (QDifferenceOperator({0: FormalSeries.polynomial([1]), 1: FormalSeries.polynomial([1])}),
     ((0, 0), (1, 0)), (0,)),
])
def test_polygon_examples(L, vertices, slopes):
    p = newton_polygon(L)
    assert p.vertices == vertices
    assert p.slopes == tuple(Fraction(s) for s in slopes)
    assert all(isinstance(s, Fraction) for s in p.slopes)


def test_polygon_positive_slopes():
    L = QDifferenceOperator({0: FormalSeries.polynomial([1]), 1: FormalSeries.polynomial([1]),
                             3: FormalSeries.polynomial([0, 0, 0, 1])})
    p = newton_polygon(L)
    assert p.slopes == (0, Fraction(3, 2))
    assert p.positive_slopes == (Fraction(3, 2),)


def test_polygon_invariant_under_units():
    L = qeuler_carre_operator(1, 2, CTX)
    unit = FormalSeries.polynomial([1, 1])
    M = QDifferenceOperator({j: series_mul(a, unit) for j, a in L.terms.items()})
    assert newton_polygon(M) == newton_polygon(L)


def test_polygon_degenerate():
    with pytest.raises(DegenerateOperator):
        newton_polygon(QDifferenceOperator({}))


@pytest.mark.parametrize("s,expected", [
    ((1, 2), (2, 2)),
    ((1,), (1,)),
    ((1, 2, 3), (2, 6, 3)),
    ((Fraction(1, 2), Fraction(2, 3)), (2, Fraction(2, 3))),
])
def test_tilde_sequence(s, expected):
    order = tilde_sequence(s)
    assert order.s_tilde == tuple(Fraction(e) for e in expected)
    assert all(isinstance(v, Fraction) for v in order.s_tilde)


@pytest.mark.parametrize("bad", [(2, 1), (1, 1), ()])
def test_tilde_sequence_rejects(bad):
    with pytest.raises(NotIncreasing):
        tilde_sequence(bad)


def test_order_one_is_euler_sum():
    x = LogPoint(0.07, 0.2)
    got = multisum(euler_borel(EulerFactor(1)), tilde_sequence([1]), 0.0, CTX, x)
    assert abs(got - euler_sum(EulerFactor(1), 0.0, CTX, x)) < 1e-9


@pytest.mark.parametrize("s", [(1,), (1, 2)])
def test_zero_germ(s):
    zero = LogFunction(lambda z: np.zeros(np.shape(z), dtype=complex))
    assert multisum(zero, tilde_sequence(s), 0.0, CTX, LogPoint(0.05, 0.0)) == 0


def test_order_12_is_product_of_sums():
    x = LogPoint(0.05, 0.0)
    got = ProductSum(1, 2, 0.0, CTX)(x)
    rhs = euler_sum(EulerFactor(1), 0.0, CTX, x) * euler_sum(EulerFactor(2), 0.0, CTX, x)
    assert abs(got - rhs) < 1e-6


def test_window_exhausted_names_stage():
    wild = LogFunction(lambda z: np.exp(0.2 * z.real ** 2) + 0j)
    cfg = DEFAULT_CONFIG.with_(max_window=4.0)
    with pytest.raises(WindowExhausted) as info:
        multisum(wild, tilde_sequence([1, 2]), 0.0, CTX, LogPoint(0.1, 0.0), cfg)
    assert info.value.stage == 1


def test_stages_invert():
    ps = ProductSum(1, 2, 0.0, CTX)
    stages = multisum_stages(ps.germ, ORDER_12, 0.0, CTX, stage_functions={1: ps.stage1})
    points = [LogPoint(float(r), 0.0) for r in np.linspace(0.05, 0.5, 10)]
    gaps = stage_inversion(ps.germ, stages, ORDER_12, CTX, points)
    assert len(gaps) == 2
    assert max(gaps) < 1e-5


def test_morphisms():
    germ1 = euler_borel(EulerFactor(1))
    germ2 = euler_borel(EulerFactor(2 + 1j))
    grid = [LogPoint(0.05, 0.0), LogPoint(0.08, 0.3)]
    rep = morphism_checks(germ1, germ1, FormalSeries.polynomial([1, 1]), 0.0, CTX, grid)
    assert rep.additivity < 1e-7
    assert rep.sigma_equivariance < 1e-6
    assert rep.pullout < 1e-6
    rep2 = morphism_checks(germ1, germ2, FormalSeries.polynomial([1, -0.5, 2]), 0.3, CTX, grid)
    assert rep2.passed(1e-6)
    with pytest.raises(ValueError):
        morphism_checks(germ1, germ2, FormalSeries.one(), 0.0, CTX, [])


def test_sigma_equivariance_through_equation():
    fac = EulerFactor(1)
    x = LogPoint(0.06, 0.1)
    s = euler_sum(fac, 0.0, CTX, x)
    sq = euler_sum(fac, 0.0, CTX, x * CTX.q)
    assert abs(x.value * sq + s - 1) < 1e-9
