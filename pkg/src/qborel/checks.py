"""The invariant battery: moment identities, round trips, kernel identities
and the morphism properties of the order-1 sum.

Each check returns a :class:`Check` holding the largest deviation seen and the
threshold it is judged against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .euler import EulerFactor, euler_borel, euler_sum_function
from .formal import as_order, qborel_formal, qlaplace_formal
from .kernel import halfpower_kernel_residual, kernel_identity_residual
from .newton import morphism_checks
from .qcore import FormalSeries, LogPoint, QContext
from .quad import (DEFAULT_CONFIG, QuadratureConfig, borel_numeric, choose_borel_radius,
                   laplace_numeric, monomial, saddle_radius)

DEFAULT_ORDERS = (1, 2, Fraction(1, 2))


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation < self.threshold)

    def as_dict(self) -> dict:
        return {"name": self.name, "max_deviation": self.deviation,
                "threshold": self.threshold, "passed": self.passed}


def moment_errors(n: int, ctx: QContext, k, x: LogPoint,
                  cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """Relative errors of L(xi^n)(x) = q'^{n(n-1)/2} x^n and
    B(x^n)(xi) = q'^{-n(n-1)/2} xi^n (with xi = x)."""
    Lp = ctx.logq / float(as_order(k))
    w = n * (n - 1) / 2.0 * Lp
    xn = np.exp(n * x.log)
    lap = laplace_numeric(monomial(n), 0.0, ctx, k, x, cfg)
    bor = borel_numeric(monomial(n), saddle_radius(x, ctx, k, n), ctx, k, x, cfg)
    return abs(lap / (math.exp(w) * xn) - 1.0), abs(bor / (math.exp(-w) * xn) - 1.0)


def gauss_moments(ns: Sequence[int] = range(-3, 7), qs: Sequence[float] = (1.5, 2.0, 4.0),
                  ks: Sequence = DEFAULT_ORDERS, x: LogPoint = LogPoint(0.7, 0.3),
                  cfg: QuadratureConfig = DEFAULT_CONFIG, threshold: float = 1e-8) -> Check:
    worst = 0.0
    for q in qs:
        ctx = QContext(q)
        for k in ks:
            for n in ns:
                worst = max(worst, *moment_errors(n, ctx, k, x, cfg))
    return Check("gauss_moments", float(worst), threshold)


def formal_round_trip(count: int = 100, length: int = 16, orders: Sequence = DEFAULT_ORDERS,
                      qs: Sequence[float] = (1.5, 2.0, 4.0), seed: int = 0,
                      threshold: float = 1e-12) -> Check:
    """Coefficientwise relative error of Lhat(Bhat(f)) against f."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        c = rng.normal(size=length) + 1j * rng.normal(size=length)
        f = FormalSeries(c, length - 1)
        ctx = QContext(float(rng.choice(qs)))
        for k in orders:
            back = qlaplace_formal(qborel_formal(f, ctx, k), ctx, k).coefficients
            worst = max(worst, float(np.max(np.abs(back - c) / np.abs(c))))
    return Check("formal_round_trip", worst, threshold)


def analytic_round_trip(points: Sequence[LogPoint], ctx: QContext = QContext(2.0),
                        d: float = 0.0, cfg: QuadratureConfig = DEFAULT_CONFIG,
                        threshold: float = 1e-6) -> Check:
    """B(L^d(phi)) against phi = 1/(1 + xi).  L^d(phi) is the sum of E_1,
    whose evaluator reduces far sheets with the residue jumps.

    The Borel integrand decays like exp(-(pi - |arg xi - d|) |tau| / (2 log q))
    once the growth of the sum is accounted for, so points close to the
    singular rays d + pi + 2 pi Z converge slowly; keep them away.
    """
    if len(points) == 0:
        raise ValueError("empty grid")
    S = euler_sum_function(EulerFactor(1.0), d, ctx, cfg)
    worst = 0.0
    for xi in points:
        got = borel_numeric(S, choose_borel_radius(xi, ctx), ctx, 1, xi, cfg)
        worst = max(worst, abs(got - 1.0 / (1.0 + xi.value)))
    return Check("analytic_round_trip", worst, threshold)


def random_points(rng: np.random.Generator, n: int, log_radius: float = 2.0,
                  max_arg: float = 20.0) -> list[LogPoint]:
    """Points of the log surface with log-modulus and argument uniform."""
    lr = rng.uniform(-log_radius, log_radius, n)
    th = rng.uniform(-max_arg, max_arg, n)
    return [LogPoint(math.exp(a), b) for a, b in zip(lr, th)]


def kernel_identities(count: int = 1000, qs: Sequence[float] = (1.5, 2.0, 4.0), seed: int = 1,
                      threshold: float = 1e-10) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    xi1, xi2, x, u = (random_points(rng, count) for _ in range(4))
    for i in range(count):
        ctx = QContext(float(qs[i % len(qs)]))
        worst = max(worst, kernel_identity_residual(xi1[i], xi2[i], x[i], ctx),
                    halfpower_kernel_residual(u[i], ctx))
    return Check("kernel_identities", worst, threshold)


def morphism_battery(ctx: QContext = QContext(2.0), d: float = 0.3,
                     grid: Sequence[LogPoint] = (LogPoint(0.1, 0.0), LogPoint(0.3, 0.5),
                                                 LogPoint(0.5, -0.4), LogPoint(0.2, 1.0)),
                     cfg: QuadratureConfig = DEFAULT_CONFIG, threshold: float = 1e-6) -> list[Check]:
    poly = FormalSeries.polynomial([1.0, -0.5, 2.0])
    rep = morphism_checks(euler_borel(EulerFactor(1.0)), euler_borel(EulerFactor(2.0 + 1.0j)),
                          poly, d, ctx, list(grid), cfg)
    return [Check(f"morphism_{name}", value, threshold) for name, value in rep.as_dict().items()]


def identity_suite(cfg: QuadratureConfig = DEFAULT_CONFIG) -> list[Check]:
    rng = np.random.default_rng(2)
    pts = [LogPoint(float(r), float(t)) for r, t in
           zip(rng.uniform(0.2, 1.5, 10), rng.uniform(-2.0, 2.0, 10))]
    return [gauss_moments(cfg=cfg), formal_round_trip(), analytic_round_trip(pts, cfg=cfg),
            kernel_identities(), *morphism_battery(cfg=cfg)]
