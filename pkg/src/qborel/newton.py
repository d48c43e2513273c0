"""Newton polygons of q-difference operators, multisummation orders and the
iterated Laplace pipeline.

The pipeline for an order (s_1 < ... < s_r) takes a Borel germ (the
continued order-s_1 Borel transform, supplied by the caller) and applies
Laplace transforms of orders s~_1, ..., s~_r along one direction, where
1/s~_i = 1/s_i - 1/s_{i+1} and s_{r+1} is infinite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DegenerateOperator, NotIncreasing, WindowExhausted
from .formal import as_order
from .qcore import FormalSeries, LogPoint, QContext, QDifferenceOperator
from .quad import (DEFAULT_CONFIG, LogFunction, Memoized, QuadratureConfig,
                   borel_numeric, laplace_numeric)


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple[tuple[int, int], ...]
    slopes: tuple[Fraction, ...]

    @property
    def positive_slopes(self) -> tuple[Fraction, ...]:
        return tuple(s for s in self.slopes if s > 0)

    def as_dict(self) -> dict:
        return {"vertices": [list(v) for v in self.vertices],
                "slopes": [str(s) for s in self.slopes]}


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_polygon(L: QDifferenceOperator, rel_tol: float = 1e-13) -> NewtonPolygon:
    """Lower convex hull of the points (j, v_0(a_j)).

    Coefficients below ``rel_tol`` times the largest coefficient magnitude
    of the operator count as zero when reading valuations.  Collinear
    interior points are dropped, so slopes are strictly increasing.
    """
    if not L.terms:
        raise DegenerateOperator("operator has no terms")
    scale = max(float(np.max(np.abs(a.coefficients))) for a in L.terms.values())
    tol = rel_tol * scale
    pts = []
    for j, a in L.terms.items():
        v = a.valuation(tol)
        if v != math.inf:
            pts.append((j, int(v)))
    n = max(L.terms)
    js = {p[0] for p in pts}
    if 0 not in js or n not in js:
        raise DegenerateOperator("the coefficients of sigma^0 and of the top shift must be nonzero")
    pts.sort()
    hull: list[tuple[int, int]] = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    slopes = tuple(Fraction(b[1] - a[1], b[0] - a[0]) for a, b in zip(hull, hull[1:]))
    return NewtonPolygon(tuple(hull), slopes)


@dataclass(frozen=True)
class MultisumOrder:
    s: tuple[Fraction, ...]
    s_tilde: tuple[Fraction, ...]

    def __str__(self):
        return ",".join(str(v) for v in self.s)


def tilde_sequence(s: Sequence) -> MultisumOrder:
    """Exact s~ sequence of a strictly increasing list of positive rationals."""
    fr = tuple(as_order(v) for v in s)
    if not fr:
        raise NotIncreasing("an order needs at least one level")
    for a, b in zip(fr, fr[1:]):
        if not a < b:
            raise NotIncreasing(f"orders must increase strictly: {a} !< {b}")
    tilde = []
    for i, si in enumerate(fr):
        inv = 1 / si - (1 / fr[i + 1] if i + 1 < len(fr) else 0)
        tilde.append(1 / inv)
    return MultisumOrder(fr, tuple(tilde))


@dataclass
class BorelGerm:
    """A continued Borel transform together with its Taylor series at 0."""

    function: LogFunction
    taylor: FormalSeries
    radius: float

    def taylor_deviation(self, n_points: int = 16) -> float:
        """Largest relative gap between the function and its Taylor
        polynomial on the circle |xi| = radius/2 (principal sheet)."""
        rho = 0.5 * self.radius
        if not math.isfinite(rho):
            rho = 0.5
        theta = np.linspace(-math.pi, math.pi, n_points, endpoint=False)
        z = math.log(rho) + 1j * theta
        f = self.function(z)
        t = self.taylor(np.exp(z))
        return float(np.max(np.abs(f - t)) / max(np.max(np.abs(f)), 1e-300))


def _stage_error(stage: int, exc: WindowExhausted) -> WindowExhausted:
    if exc.stage is not None:
        return exc
    return WindowExhausted(str(exc), stage=stage)


class StageFunction(LogFunction):
    """The j-th intermediate sum, evaluated pointwise by quadrature."""

    def __init__(self, inner: LogFunction, k: Fraction, d: float, ctx: QContext,
                 cfg: QuadratureConfig, stage: int):
        self.inner, self.k, self.d, self.ctx, self.cfg, self.stage = inner, k, d, ctx, cfg, stage
        super().__init__(self._eval, None, math.inf, f"stage{stage}")

    def _eval(self, z):
        out = np.empty(np.shape(z), dtype=complex)
        for i, w in enumerate(np.ravel(z)):
            try:
                out.flat[i] = laplace_numeric(self.inner, self.d, self.ctx, self.k,
                                              LogPoint.from_log(w), self.cfg)
            except WindowExhausted as exc:
                raise _stage_error(self.stage, exc) from None
        return out


def multisum_stages(germ, order: MultisumOrder, d: float, ctx: QContext,
                    cfg: QuadratureConfig = DEFAULT_CONFIG,
                    stage_functions: Optional[Mapping[int, LogFunction]] = None,
                    memoize: bool = True) -> list[LogFunction]:
    """The functions after each Laplace stage (1-based stage j at index j-1).

    ``stage_functions`` may replace stage j by an equivalent closed form or
    faster representation (its value must equal the stage-j sum).
    """
    fn = germ.function if isinstance(germ, BorelGerm) else germ
    stages = []
    overrides = dict(stage_functions or {})
    for j, k in enumerate(order.s_tilde, start=1):
        if j in overrides:
            fn = overrides[j]
        else:
            fn = StageFunction(fn, k, d, ctx, cfg, j)
        if memoize and j < len(order.s_tilde):
            fn = Memoized(fn)
        stages.append(fn)
    return stages


def multisum(germ, order: MultisumOrder, d: float, ctx: QContext, x: LogPoint,
             cfg: QuadratureConfig = DEFAULT_CONFIG,
             stage_functions: Optional[Mapping[int, LogFunction]] = None) -> complex:
    """S^d_{q; s}(f)(x): iterated Laplace transforms of orders s~_1..s~_r."""
    stages = multisum_stages(germ, order, d, ctx, cfg, stage_functions)
    try:
        return stages[-1].at(x)
    except WindowExhausted as exc:
        raise _stage_error(len(stages), exc) from None


class BorelStage(LogFunction):
    """Pointwise order-k Borel transform over spirals of one fixed radius
    ``scale * |xi|``; with a shared radius set the inner evaluations of a
    nested chain land on a common lattice and memoize well."""

    def __init__(self, inner: LogFunction, k: Fraction, ctx: QContext, cfg: QuadratureConfig):
        self.inner, self.k, self.ctx, self.cfg = inner, k, ctx, cfg
        self.scale = math.exp(0.5 * ctx.logq / float(k))
        super().__init__(self._eval, None, math.inf, f"borel{k}")

    def _eval(self, z):
        out = np.empty(np.shape(z), dtype=complex)
        for i, w in enumerate(np.ravel(z)):
            xi = LogPoint.from_log(w)
            out.flat[i] = borel_numeric(self.inner, self.scale * xi.modulus, self.ctx,
                                        self.k, xi, self.cfg)
        return out


def stage_inversion(germ, stages: Sequence[LogFunction], order: MultisumOrder, ctx: QContext,
                    points: Sequence[LogPoint],
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> list[float]:
    """Largest gap, per stage j, between B_{q;s~_j}(stage j) and stage j-1
    (stage 0 being the germ) over ``points``.

    Each Borel transform is checked against the stage below it rather than
    nested: the inner spiral integrals of a nested chain only converge for
    arguments within pi of the summation direction, which the outer spirals
    leave.
    """
    fn0 = germ.function if isinstance(germ, BorelGerm) else germ
    below = [fn0, *stages[:-1]]
    gaps = []
    for j, (k, upper, lower) in enumerate(zip(order.s_tilde, stages, below), start=1):
        b = BorelStage(upper, k, ctx, cfg)
        gaps.append(max(abs(b.at(p) - lower.at(p)) for p in points))
    return gaps


# --- algebraic properties of the order-1 sum ------------------------------------

def shifted_germ(phi: LogFunction, ctx: QContext) -> LogFunction:
    """Borel germ of sigma_q f when phi is the germ of f: xi -> phi(q xi)."""
    L = ctx.logq
    return LogFunction(lambda z: phi(z + L), None, phi.radius / ctx.q, "sigma")


def pullout_germ(poly: FormalSeries, phi: LogFunction, ctx: QContext) -> LogFunction:
    """Borel germ of p f for a polynomial p = sum p_j x^j:
    xi -> sum_j p_j q^{-j(j-1)/2} xi^j phi(xi / q^j)."""
    L = ctx.logq
    coeffs = [(j, complex(c)) for j, c in enumerate(poly.coefficients) if c != 0]

    def fn(z):
        acc = np.zeros(np.shape(z), dtype=complex)
        for j, c in coeffs:
            acc = acc + c * np.exp(-j * (j - 1) / 2.0 * L + j * z) * phi(z - j * L)
        return acc

    return LogFunction(fn, None, phi.radius, "pullout")


@dataclass(frozen=True)
class MorphismReport:
    additivity: float
    sigma_equivariance: float
    pullout: float

    def passed(self, threshold: float = 1e-6) -> bool:
        return max(self.additivity, self.sigma_equivariance, self.pullout) < threshold

    def as_dict(self) -> dict:
        return {"additivity": self.additivity, "sigma_equivariance": self.sigma_equivariance,
                "pullout": self.pullout}


def morphism_checks(germ1: LogFunction, germ2: LogFunction, poly: FormalSeries, d: float,
                    ctx: QContext, grid: Sequence[LogPoint],
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> MorphismReport:
    """Largest deviations, over the grid, of

    (i)   S(f1 + f2) - S(f1) - S(f2),
    (ii)  S(sigma_q f1)(x) - S(f1)(q x),
    (iii) S(p f1) - p S(f1),

    for the order-1 sum along d, with f1, f2 given by their Borel germs.
    """
    if len(grid) == 0:
        raise ValueError("empty grid")

    def S(phi, x):
        return laplace_numeric(phi, d, ctx, 1, x, cfg)

    both = LogFunction(lambda z: germ1(z) + germ2(z), None, min(germ1.radius, germ2.radius))
    sig = shifted_germ(germ1, ctx)
    pull = pullout_germ(poly, germ1, ctx)
    dev = [0.0, 0.0, 0.0]
    for x in grid:
        s1 = S(germ1, x)
        dev[0] = max(dev[0], abs(S(both, x) - s1 - S(germ2, x)))
        dev[1] = max(dev[1], abs(S(sig, x) - S(germ1, x * ctx.q)))
        dev[2] = max(dev[2], abs(S(pull, x) - complex(poly(x.value)) * s1))
    return MorphismReport(*dev)
