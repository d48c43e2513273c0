"""The product of two q-Euler series summed at order (1, 2).

For E_a E_b the formal Borel transform f1 (order 1) is the unique analytic
solution of

    (q^{-1} zeta^2 sigma_q^{-1} - ab) f1 = (zeta^2 - ab) / ((zeta + a)(zeta + b)).

The first Laplace stage f2 = L_{q;2}(f1) converges only for
|zeta| < R0 = q^{1/4} sqrt|ab|; beyond that it is evaluated through

    (q^{-1/2} zeta^2 - ab) f2 = 1 - a S_a - b S_b,

with S_* the order-2 sums of E_{*, q^{1/2}}.  Near the zeros of the left
factor a Cauchy average on a small circle replaces the division.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DivisionNearZero, NonConvergent, PoleHit, SingularDirection
from .euler import (EulerFactor, SingularSet, euler_borel, euler_coeffs, euler_sum,
                    singular_directions)
from .formal import qborel_formal
from .qcore import FormalSeries, LogPoint, QContext, QDifferenceOperator, operator_apply, series_mul
from .newton import multisum_stages, tilde_sequence
from .quad import DEFAULT_CONFIG, LogFunction, Memoized, QuadratureConfig, laplace_numeric

TAYLOR_TERMS = 60
POLE_TOL = 1e-10
# fraction of R0 inside which f2 is computed by quadrature
QUAD_FRACTION = 0.5
# Cauchy-average geometry, as fractions of R0
CAUCHY_RADIUS = 0.5
CAUCHY_ZONE = 0.25
CAUCHY_POINTS = 64

ORDER_12 = tilde_sequence([1, 2])


def euler_operator(a: complex) -> QDifferenceOperator:
    """x sigma_q + a, the operator of the Euler equation."""
    return QDifferenceOperator({0: FormalSeries.polynomial([complex(a)]),
                                1: FormalSeries.polynomial([0, 1])})


def qeuler_carre_operator(a: complex, b: complex, ctx: QContext) -> QDifferenceOperator:
    """(x sigma_q + a)(x sigma_q + b)(x^2 sigma_q - ab), which maps E_a E_b to
    q x^2 - ab."""
    a, b = complex(a), complex(b)
    lc = QDifferenceOperator({0: FormalSeries.polynomial([-a * b]),
                              1: FormalSeries.polynomial([0, 0, 1])})
    return euler_operator(a).compose(euler_operator(b), ctx).compose(lc, ctx)


def operator_identity_residual(a: complex, b: complex, ctx: QContext, N: int = 10) -> float:
    """Largest relative coefficient gap between L(E_a E_b) and q x^2 - ab
    through x^N; each coefficient is scaled by the sum of the magnitudes of
    the terms that produce it."""
    L = qeuler_carre_operator(a, b, ctx)
    y = series_mul(euler_coeffs(EulerFactor(a), ctx, N), euler_coeffs(EulerFactor(b), ctx, N))
    got = operator_apply(L, y, ctx).coefficients[: N + 1]
    absL = QDifferenceOperator({j: FormalSeries(np.abs(c.coefficients), c.order)
                                for j, c in L.terms.items()})
    scale = operator_apply(absL, FormalSeries(np.abs(y.coefficients), y.order), ctx).coefficients[: N + 1]
    target = np.zeros(N + 1, dtype=complex)
    target[0] = -complex(a) * complex(b)
    if N >= 2:
        target[2] = ctx.q
    return float(np.max(np.abs(got - target) / np.maximum(np.abs(scale), 1e-300)))


def f1_taylor(a: complex, b: complex, ctx: QContext, N: int = TAYLOR_TERMS) -> FormalSeries:
    """Taylor coefficients of f1: (-1)^k sum_{i+j=k} q^{-ij} a^{-i-1} b^{-j-1}."""
    a, b = complex(a), complex(b)
    i = np.arange(N + 1)
    coeffs = np.zeros(N + 1, dtype=complex)
    for k in range(N + 1):
        ii = i[: k + 1]
        jj = k - ii
        coeffs[k] = (-1) ** k * np.sum(np.exp(-ii * jj * ctx.logq) * a ** (-ii - 1.0) * b ** (-jj - 1.0))
    return FormalSeries(coeffs, N)


def f1_taylor_formal(a: complex, b: complex, ctx: QContext, N: int) -> FormalSeries:
    """The same coefficients from the formal Borel transform of E_a E_b."""
    prod = series_mul(euler_coeffs(EulerFactor(a), ctx, N), euler_coeffs(EulerFactor(b), ctx, N))
    return qborel_formal(prod, ctx, 1)


def _g(zeta, a, b):
    return (a * b - zeta * zeta) / (a * b * (zeta + a) * (zeta + b))


class F1:
    """Vectorized evaluator of f1 for fixed (a, b, q).

    The recursion f1(z) = g(z) + z^2/(abq) f1(z/q) is unrolled until
    |z|/q^j <= min(|a|,|b|)/2, where the Taylor series takes over.
    """

    def __init__(self, a: complex, b: complex, ctx: QContext, terms: int = TAYLOR_TERMS):
        self.a, self.b, self.ctx = complex(a), complex(b), ctx
        if self.a == 0 or self.b == 0:
            raise ValueError("a and b must be nonzero")
        self.rho = 0.5 * min(abs(self.a), abs(self.b))
        self.taylor = f1_taylor(self.a, self.b, ctx, terms)
        tail = abs(self.taylor.coefficients[-1]) * self.rho ** terms
        if tail > 1e-14 * max(1.0, abs(self.taylor.coefficients[0])):
            raise NonConvergent("Taylor tail of f1 is not negligible on the base disc")

    def __call__(self, zeta) -> np.ndarray:
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        L = self.ctx.logq
        absz = np.abs(zeta)
        with np.errstate(divide="ignore"):
            steps = np.where(absz > self.rho,
                             np.ceil(np.log(np.maximum(absz, 1e-300) / self.rho) / L), 0).astype(int)
        jmax = int(steps.max()) if steps.size else 0
        total = np.zeros_like(zeta)
        logw = np.zeros(zeta.shape, dtype=complex)  # log of the running weight
        z = zeta.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            self._unroll(z, steps, jmax, total, logw)
        return total

    def _unroll(self, z, steps, jmax, total, logw):
        a, b, q = self.a, self.b, self.ctx.q
        lab = cmath.log(a * b * q)
        for j in range(jmax + 1):
            active = steps > j
            base = steps == j
            for p in (a, b):
                near = (active | base) & (np.abs(z + p) < POLE_TOL * abs(p))
                if np.any(near):
                    raise PoleHit(f"zeta is within {POLE_TOL:g} of a pole -{p}*q^{j}")
            if np.any(active):
                total[active] += np.exp(logw[active]) * _g(z[active], a, b)
            if np.any(base):
                total[base] += np.exp(logw[base]) * self.taylor(z[base])
            nz = active
            logw[nz] += 2.0 * np.log(z[nz]) - lab
            z[nz] = z[nz] / q

    def as_log_function(self) -> LogFunction:
        return LogFunction(lambda w: self(np.exp(w)).reshape(np.shape(w)), None,
                           min(abs(self.a), abs(self.b)), "f1")


def f1_eval(a: complex, b: complex, ctx: QContext, zeta: LogPoint) -> complex:
    return complex(F1(a, b, ctx)(zeta.value)[0])


def f1_residual(a, b, ctx: QContext, zeta) -> np.ndarray:
    """|q^{-1} z^2 f1(z/q) - ab f1(z) - (z^2 - ab)/((z+a)(z+b))|."""
    f = F1(a, b, ctx)
    z = np.atleast_1d(np.asarray(zeta, dtype=complex))
    lhs = z * z / ctx.q * f(z / ctx.q) - a * b * f(z)
    rhs = (z * z - a * b) / ((z + a) * (z + b))
    return np.abs(lhs - rhs)


def f1_closed_series(a, b, ctx: QContext, zeta: complex, terms: int = 40,
                     exponent_2n: bool = False, power_n_plus_1: bool = False) -> complex:
    """Partial sums of the closed-form series for f1 in its uncorrected shape,

        sum_n zeta^{2n} (ab q^{n} - zeta^2) / ((ab)^n q^{n^2} (a q^n + zeta)(b q^n + zeta)),

    with switches for the two corrections (q^{2n} in the numerator and
    (ab)^{n+1} in the denominator).
    """
    q = ctx.q
    s = 0j
    for n in range(terms):
        qn = q ** n
        num = a * b * (q ** (2 * n) if exponent_2n else qn) - zeta ** 2
        den = (a * b) ** (n + 1 if power_n_plus_1 else n) * (a * qn + zeta) * (b * qn + zeta)
        s += zeta ** (2 * n) * num / den * math.exp(-n * n * ctx.logq)
    return s


# --- the first Laplace stage --------------------------------------------------

def cauchy_zero_set(a: complex, b: complex, ctx: QContext) -> SingularSet:
    """Directions arg(sqrt(ab)) + pi Z where zeta^2 = q^{1/2} ab can occur."""
    return SingularSet.from_angles([cmath.phase(complex(a) * complex(b)) / 2.0], period=math.pi)


@dataclass
class F2:
    """Evaluator of f2^d on the log surface (hybrid representation)."""

    a: complex
    b: complex
    d: float
    ctx: QContext
    cfg: QuadratureConfig = DEFAULT_CONFIG
    c: float = 1.0
    f1: F1 = field(init=False)

    def __post_init__(self):
        self.a, self.b = complex(self.a), complex(self.b)
        sing = singular_directions([EulerFactor(self.a), EulerFactor(self.b)])
        if sing.contains(self.d):
            raise SingularDirection(f"direction {self.d} lies in the singular set")
        self.f1 = F1(self.a, self.b, self.ctx)
        self.f1_log = self.f1.as_log_function()
        self.ctx2 = self.ctx.rescaled(2)
        self.R0 = math.exp(self.ctx.logq / 4.0) * math.sqrt(abs(self.a * self.b))

    # individual representations
    def quadrature(self, zeta: LogPoint) -> complex:
        return laplace_numeric(self.f1_log, self.d, self.ctx, 2, zeta, self.cfg)

    def division(self, zeta: LogPoint, check: bool = True) -> complex:
        z = zeta.value
        den = z * z / math.exp(self.ctx.logq / 2.0) - self.a * self.b
        if check and abs(den) < 1e-8:
            raise DivisionNearZero("q^{-1/2} zeta^2 - ab vanishes here")
        sa = euler_sum(EulerFactor(self.a), self.d, self.ctx2, zeta, self.cfg)
        sb = euler_sum(EulerFactor(self.b), self.d, self.ctx2, zeta, self.cfg)
        return (self.c - self.a * sa - self.b * sb) / den

    def _nearest_zero(self, zeta: LogPoint) -> LogPoint:
        half = cmath.phase(self.a * self.b) / 2.0
        k = round((zeta.argument - half) / math.pi)
        return LogPoint(self.R0, half + k * math.pi)

    def cauchy(self, zeta: LogPoint, center: Optional[LogPoint] = None) -> complex:
        """Trapezoid Cauchy integral on a circle around the nearest zero of
        the division denominator (all nodes on the sheet of ``center``)."""
        center = center or self._nearest_zero(zeta)
        c = center.value
        rho = CAUCHY_RADIUS * self.R0
        theta = 2.0 * math.pi * np.arange(CAUCHY_POINTS) / CAUCHY_POINTS
        w = c + rho * np.exp(1j * theta)
        zval = zeta.value
        acc = 0j
        for wm, th in zip(w, theta):
            lw = center.log + cmath.log(1.0 + (wm - c) / c)
            fw = self.division(LogPoint.from_log(lw), check=False)
            acc += fw * rho * cmath.exp(1j * th) / (wm - zval)
        return acc / CAUCHY_POINTS

    def __call__(self, zeta: LogPoint, mode: str = "auto") -> complex:
        if mode == "quadrature":
            return self.quadrature(zeta)
        if mode == "division":
            return self.division(zeta)
        if mode == "cauchy":
            return self.cauchy(zeta)
        if mode != "auto":
            raise ValueError(f"unknown mode {mode!r}")
        if zeta.modulus <= QUAD_FRACTION * self.R0:
            return self.quadrature(zeta)
        zero = self._nearest_zero(zeta)
        if abs(zeta.value - zero.value) < CAUCHY_ZONE * self.R0:
            return self.cauchy(zeta, zero)
        return self.division(zeta)

    def as_log_function(self, mode: str = "auto") -> LogFunction:
        def fn(z):
            z = np.asarray(z, dtype=complex)
            return np.array([self(LogPoint.from_log(w), mode) for w in z.ravel()],
                            dtype=complex).reshape(z.shape)

        return LogFunction(fn, None, math.inf, "f2")


def f2_eval(a, b, d: float, ctx: QContext, zeta: LogPoint,
            cfg: QuadratureConfig = DEFAULT_CONFIG, mode: str = "auto", c: float = 1.0) -> complex:
    """f2^d(zeta).  ``mode`` is "quadrature" (order-2 Laplace of f1),
    "division" (closed form with constant ``c``), "cauchy" or "auto"."""
    return F2(a, b, d, ctx, cfg, c)(zeta, mode)


# --- the order-(1,2) sum ---------------------------------------------------------

class ProductSum:
    """x -> S^d_{q;(1,2)}(E_a E_b)(x), sharing the memoized first stage."""

    def __init__(self, a, b, d: float, ctx: QContext, cfg: QuadratureConfig = DEFAULT_CONFIG):
        self.f2 = F2(a, b, d, ctx, cfg)
        self.stage1 = Memoized(self.f2.as_log_function())
        self.d, self.ctx, self.cfg = d, ctx, cfg
        self.germ = self.f2.f1_log

    def __call__(self, x: LogPoint) -> complex:
        stages = multisum_stages(self.germ, ORDER_12, self.d, self.ctx, self.cfg,
                                 stage_functions={1: self.stage1})
        return stages[-1].at(x)


def product_sum(a, b, d: float, ctx: QContext, x: LogPoint,
                cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    return ProductSum(a, b, d, ctx, cfg)(x)


# --- decompositions and the product theorem -----------------------------------------

@dataclass(frozen=True)
class DecompositionTerm:
    """prefactor(x) * E^{[m]}_{a,q}; ``factor=None`` is the unit term."""

    prefactor: FormalSeries
    factor: Optional[EulerFactor]
    radius: float = math.inf

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("prefactor radius must be positive")


@dataclass(frozen=True)
class EulerDecomposition:
    terms: tuple[DecompositionTerm, ...]

    def singular_set(self) -> SingularSet:
        return singular_directions([t.factor for t in self.terms if t.factor is not None])

    @classmethod
    def from_json(cls, obj) -> "EulerDecomposition":
        from .qcore import series_from_json
        terms = []
        for t in obj["terms"]:
            a = t.get("a")
            fac = None
            if a is not None:
                av = complex(*a) if isinstance(a, (list, tuple)) else complex(a)
                fac = EulerFactor(av, int(t.get("m", 0)))
            terms.append(DecompositionTerm(series_from_json(t["prefactor"]), fac,
                                           float(t.get("radius", math.inf))))
        if not terms:
            raise ValueError("decomposition has no terms")
        return cls(tuple(terms))


def _fd_weights(m: int) -> list[tuple[float, int]]:
    """Central-difference stencil for the m-th derivative: (offset, weight)."""
    return [(m / 2.0 - k, (-1) ** k * math.comb(m, k)) for k in range(m + 1)]


def cell_sum(fa: EulerFactor, fb: EulerFactor, d: float, ctx: QContext, grid: Sequence[LogPoint],
             cfg: QuadratureConfig = DEFAULT_CONFIG, rel_step: Optional[float] = None) -> np.ndarray:
    """S^d_{q;(1,2)}(E^{[m]}_a E^{[n]}_b) on the grid.

    The Borel germ of the cell is d^m/da^m d^n/db^n f1; by linearity of the
    pipeline this is the matching central difference of order-(1,2) sums.
    """
    m, n = fa.m, fb.m
    if rel_step is None:
        rel_step = 1e-4 if m + n == 1 else 1e-10 ** (1.0 / (m + n + 2))
    ha = rel_step * abs(fa.a)
    hb = rel_step * abs(fb.a)
    out = np.zeros(len(grid), dtype=complex)
    for oa, wa in _fd_weights(m):
        for ob, wb in _fd_weights(n):
            ps = ProductSum(fa.a + oa * ha, fb.a + ob * hb, d, ctx, cfg)
            vals = np.array([ps(x) for x in grid])
            out += wa * wb * vals
    return out / (ha ** m * hb ** n)


def unit_cell_sum(fb: EulerFactor, d: float, ctx: QContext, grid: Sequence[LogPoint],
                  cfg: QuadratureConfig = DEFAULT_CONFIG) -> np.ndarray:
    """S^d_{q;(1,2)}(E^{[n]}_b): its Borel germ taken through two order-2 stages."""
    stages = multisum_stages(euler_borel(fb), ORDER_12, d, ctx, cfg)
    return np.array([stages[-1].at(x) for x in grid])


@dataclass
class ProductReport:
    max_deviation: float
    lhs: list
    rhs: list
    cells: list

    def as_dict(self) -> dict:
        return {"max_deviation": self.max_deviation,
                "cells": self.cells,
                "points": [{"lhs": [v.real, v.imag], "rhs": [w.real, w.imag]}
                           for v, w in zip(self.lhs, self.rhs)]}


def product_theorem_check(A: EulerDecomposition, B: EulerDecomposition, d: float, ctx: QContext,
                          grid: Sequence[LogPoint], cfg: QuadratureConfig = DEFAULT_CONFIG) -> ProductReport:
    """Compare S_{(1,2)}(fg) with S_1(f) S_1(g) for f = sum f_i E_i, g = sum g_j E_j."""
    if len(grid) == 0:
        raise ValueError("empty grid")
    sing = A.singular_set() | B.singular_set()
    if sing.contains(d):
        raise SingularDirection(f"direction {d} lies in the singular set of the decompositions")

    def prefactor(term, x):
        if x.modulus >= term.radius:
            raise ValueError("grid point outside the prefactor's disc of convergence")
        return complex(term.prefactor(x.value))

    def sum1(fac, x):
        return 1.0 if fac is None else euler_sum(fac, d, ctx, x, cfg)

    lhs = np.zeros(len(grid), dtype=complex)
    rhs = np.zeros(len(grid), dtype=complex)
    cells = []
    for ti in A.terms:
        for tj in B.terms:
            pre = np.array([prefactor(ti, x) * prefactor(tj, x) for x in grid])
            fa, fb = ti.factor, tj.factor
            if fa is None and fb is None:
                cell = np.ones(len(grid), dtype=complex)
            elif fa is None or fb is None:
                cell = unit_cell_sum(fb if fa is None else fa, d, ctx, grid, cfg)
            else:
                cell = cell_sum(fa, fb, d, ctx, grid, cfg)
            lhs += pre * cell
            rhs += pre * np.array([sum1(fa, x) * sum1(fb, x) for x in grid])
            cells.append({"A": _fac_label(fa), "B": _fac_label(fb)})
    dev = float(np.max(np.abs(lhs - rhs)))
    return ProductReport(dev, lhs.tolist(), rhs.tolist(), cells)


def _fac_label(fac):
    if fac is None:
        return None
    return {"a": [fac.a.real, fac.a.imag], "m": fac.m}


# --- the psi* identity ----------------------------------------------------------

def psi_star_quadrature(a, b, d: float, ctx: QContext, zeta: LogPoint,
                        cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """int_0^{inf e^{id}} e_{q^2}(xi/q) phi(xi, zeta) dxi/xi with
    phi = 1/((a + q^{-1/4} sqrt(xi) zeta)(b + q^{-1/4} zeta / sqrt(xi)))."""
    a, b = complex(a), complex(b)
    s = math.exp(-ctx.logq / 4.0) * zeta.value

    def phi(z):
        r = np.exp(0.5 * z)
        return 1.0 / ((a + s * r) * (b + s / r))

    # e_{q^2}(xi/x) at x = q is the order-1/2 Laplace kernel
    return laplace_numeric(LogFunction(phi), d, ctx, Fraction(1, 2), LogPoint(ctx.q, 0.0), cfg)


def psi_star_closed(a, b, d: float, ctx: QContext, zeta: LogPoint,
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """(a S_a + b S_b - 1)/(ab - q^{-1/2} zeta^2), order-2 sums at base q^{1/2}."""
    a, b = complex(a), complex(b)
    ctx2 = ctx.rescaled(2)
    sa = euler_sum(EulerFactor(a), d, ctx2, zeta, cfg)
    sb = euler_sum(EulerFactor(b), d, ctx2, zeta, cfg)
    z = zeta.value
    return (a * sa + b * sb - 1.0) / (a * b - z * z / math.exp(ctx.logq / 2.0))
