"""The q-Euler family E^{[m]}_{a,q}: the formal solutions of x y(qx) + a y(x) = 1
and their a-derivatives, with Borel transforms, directional sums, singular
directions, Stokes jumps and the growth machinery for 1/S(E).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import SingularDirection, ZeroParameter
from .formal import as_order
from .qcore import FormalSeries, LogPoint, QContext, series_exp, series_mul
from .quad import (DEFAULT_CONFIG, LogFunction, QuadratureConfig, borel_numeric,
                   growth_scan, laplace_numeric)

TWO_PI = 2.0 * math.pi
# exp(M) above this in "auto" mode triggers the Stokes reduction
_AUTO_CANCELLATION = 1e6


@dataclass(frozen=True)
class EulerFactor:
    a: complex
    m: int = 0

    def __post_init__(self):
        a = complex(self.a)
        if a == 0:
            raise ZeroParameter("the Euler parameter a must be nonzero")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError("derivative order m must be a non-negative integer")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "m", int(self.m))

    @property
    def pole_angle(self) -> float:
        """Principal argument of -a, in (-pi, pi]."""
        return cmath.phase(-self.a)


def euler_coeffs(fac: EulerFactor, ctx: QContext, N: int) -> FormalSeries:
    """Coefficients of E^{[m]}_{a,q} through x**N.

    From a c_0 = 1 and a c_n = -q^{n-1} c_{n-1}; differentiating j times in a
    gives a c^{(j)}_n + j c^{(j-1)}_n + q^{n-1} c^{(j)}_{n-1} = [n = j = 0].
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    a, m = fac.a, fac.m
    c = np.zeros((m + 1, N + 1), dtype=complex)
    for n in range(N + 1):
        qn = math.exp((n - 1) * ctx.logq) if n else 0.0
        for j in range(m + 1):
            rhs = 1.0 if (n == 0 and j == 0) else 0.0
            if j:
                rhs -= j * c[j - 1, n]
            if n:
                rhs -= qn * c[j, n - 1]
            c[j, n] = rhs / a
    return FormalSeries(c[m], N)


def euler_borel(fac: EulerFactor) -> LogFunction:
    """xi -> (-1)^m m! / (xi + a)^{m+1}, the Borel transform of E^{[m]}_{a,q}."""
    a, m = fac.a, fac.m
    c = (-1) ** m * math.factorial(m)
    am = mpmath.mpc(a.real, a.imag)

    def fn(z):
        return c / (np.exp(z) + a) ** (m + 1)

    def mp(z):
        return c / (mpmath.exp(z) + am) ** (m + 1)

    return LogFunction(fn, mp, abs(a), f"borel(E[{m}]_{a})")


# --- alternative closed forms kept for comparison -------------------------------

def euler_coeffs_power_form(a: complex, ctx: QContext, N: int) -> FormalSeries:
    """The closed form sum (-1)^n a^n q^{n(n-1)/2} x^n, which solves the
    Euler equation only when a = 1 (the true constant term is 1/a)."""
    n = np.arange(N + 1)
    return FormalSeries((-1.0) ** n * complex(a) ** n * np.exp(n * (n - 1) / 2.0 * ctx.logq), N)


def euler_borel_without_factorial(fac: EulerFactor) -> LogFunction:
    """xi -> (-1)^m / (xi + a)^{m+1}, i.e. the Borel germ without m!."""
    a, m = fac.a, fac.m
    return LogFunction(lambda z: (-1) ** m / (np.exp(z) + a) ** (m + 1), None, abs(a))


def euler_residual(coeffs: FormalSeries, a: complex, ctx: QContext) -> float:
    """Largest relative coefficient of x sigma_q y + a y - 1 for a truncated
    series y (each coefficient is scaled by the size of its two terms)."""
    c = coeffs.coefficients.astype(complex)
    n = np.arange(len(c))
    shifted = np.zeros_like(c)
    shifted[1:] = np.exp(n[:-1] * ctx.logq) * c[:-1]  # coefficients of x y(qx)
    lhs = complex(a) * c + shifted
    lhs[0] -= 1.0
    scale = np.abs(complex(a) * c) + np.abs(shifted)
    scale[0] = max(scale[0], 1.0)
    return float(np.max(np.abs(lhs) / scale))


@dataclass(frozen=True)
class SingularSet:
    """Union of lattices angle + period*Z (period 2pi unless stated)."""

    lattices: tuple[tuple[float, float], ...]

    @classmethod
    def from_angles(cls, angles: Iterable[float], period: float = TWO_PI) -> "SingularSet":
        return cls(tuple((float(t), period) for t in angles))

    def __or__(self, other: "SingularSet") -> "SingularSet":
        return SingularSet(self.lattices + other.lattices)

    @property
    def base_angles(self) -> list[float]:
        return sorted({t for t, _ in self.lattices})

    def contains(self, d: float, tol: float = 1e-9) -> bool:
        for t, p in self.lattices:
            k = round((d - t) / p)
            if abs(d - t - k * p) < tol:
                return True
        return False

    def representatives(self, lo: float, hi: float) -> list[float]:
        """Sorted members strictly inside (lo, hi)."""
        out = set()
        for t, p in self.lattices:
            k = math.floor((lo - t) / p)
            while t + k * p < hi:
                v = t + k * p
                if lo < v < hi:
                    out.add(v)
                k += 1
        return sorted(out)

    def sector(self, d: float) -> tuple[float, float]:
        """The open singularity-free interval containing d."""
        if not self.lattices:
            return (-math.inf, math.inf)
        lo, hi = -math.inf, math.inf
        for t, p in self.lattices:
            k = math.floor((d - t) / p)
            lo = max(lo, t + k * p)
            hi = min(hi, t + (k + 1) * p)
        return lo, hi


def singular_directions(facs: Sequence[EulerFactor]) -> SingularSet:
    """arg(-a_i) + 2 pi Z over the given factors (callers filter as needed)."""
    return SingularSet.from_angles(f.pole_angle for f in facs)


# --- Stokes jumps -------------------------------------------------------------

def _log1p_series(w: complex, order: int) -> FormalSeries:
    """Taylor coefficients of log(1 + h/w) in h."""
    c = [0j] + [(-1) ** (j + 1) / (j * w ** j) for j in range(1, order + 1)]
    return FormalSeries(c, order)


def _residue_terms(fac: EulerFactor, ctx: QContext, x: LogPoint, d1: float, d2: float):
    """(exponent, mantissa) pairs; each crossed pole contributes
    2 pi i * e^{exponent} * mantissa to S^{d1} - S^{d2} (d1 < d2)."""
    L = ctx.logq
    m = fac.m
    X = x.log - 0.5 * L
    out = []
    for theta in singular_directions([fac]).representatives(d1, d2):
        wp = complex(math.log(abs(fac.a)), theta)
        xi_p = cmath.exp(wp)
        D = X - wp
        P0 = -(D * D) / (2.0 * L) - wp
        if m == 0:
            mant = 1.0 + 0j
        else:
            ell = _log1p_series(xi_p, m)
            dl = FormalSeries([D], m) - ell
            P = series_mul(dl, dl) * (-1.0 / (2.0 * L)) - ell
            P = P - P[0]
            mant = series_exp(P)[m] * ((-1) ** m) * math.factorial(m)
        mant /= math.sqrt(TWO_PI * L)
        out.append((P0, mant))
    return out


def stokes_jump_mp(fac: EulerFactor, d1: float, d2: float, ctx: QContext, x: LogPoint):
    """S^{d1}(x) - S^{d2}(x) as an mpmath complex (no overflow)."""
    for d in (d1, d2):
        if singular_directions([fac]).contains(d):
            raise SingularDirection(f"direction {d} is singular for a={fac.a}")
    if d1 == d2:
        return mpmath.mpc(0)
    sign = 1
    if d1 > d2:
        d1, d2, sign = d2, d1, -1
    total = mpmath.mpc(0)
    for P0, mant in _residue_terms(fac, ctx, x, d1, d2):
        total += mpmath.exp(mpmath.mpc(P0.real, P0.imag)) * mpmath.mpc(mant.real, mant.imag)
    return sign * 2j * mpmath.pi * total


def stokes_jump(fac: EulerFactor, d1: float, d2: float, ctx: QContext, x: LogPoint) -> complex:
    """Predicted S^{d1}(x) - S^{d2}(x) from the residues at the poles -a on
    the sheets crossed between the two rays."""
    return complex(stokes_jump_mp(fac, d1, d2, ctx, x))


def stokes_n_correction(N: int, x: LogPoint, ctx: QContext, plus_sign: bool = False):
    """The sum in S^0(E_1)(x) = S^0(E_1)(x e^{-2 pi i N}) + correction.

    For N > 0 the correction is -i sqrt(2pi/L) sum_{k<N} exp(-(log(x e^{-pi i(2k+1)}/sqrt q))^2/(2L));
    for N < 0 it is +i sqrt(2pi/L) sum_{k<|N|} exp(-(log(x e^{+pi i(2k+1)}/sqrt q))^2/(2L)).
    ``plus_sign=True`` flips both signs (the form with a + for N > 0).
    Returned as an mpmath complex.
    """
    if N == 0:
        return mpmath.mpc(0)
    L = mpmath.mpf(ctx.logq)
    pi = mpmath.pi
    lam = 2 * pi ** 2 / L
    n = abs(N)
    s = 1 if N > 0 else -1
    # e^{-(log x - L/2 - s i pi(2k+1))^2/(2L)} = e^{lam (n - k + r0)^2}
    w = mpmath.mpc(mpmath.log(x.modulus), x.argument) - L / 2 - s * 1j * pi
    r0 = -s * 1j * w / (2 * pi) - n
    total = geometric_bound_sum(n, r0, lam)
    pref = -s * 1j * mpmath.sqrt(2 * pi / L)
    if plus_sign:
        pref = -pref
    return pref * total


# --- directional sums -----------------------------------------------------------

def _mp_complex(v) -> complex:
    return complex(v)


def _pole_safe_step(fac: EulerFactor, d: float, arg: float, L: float) -> float:
    """Trapezoid step small enough that the poles of the Borel transform,
    at angular distance delta from the ray, are not aliased.  Their Poisson
    contribution behaves like exp((|arg - d| + delta)^2/(2L) - 2 pi delta / h).
    """
    t = fac.pole_angle
    delta = abs(d - t - TWO_PI * round((d - t) / TWO_PI))
    growth = (abs(arg - d) + delta) ** 2 / (2.0 * L)
    return min(0.1 * math.sqrt(L), TWO_PI * delta / (growth + 60.0))


def _auto_dps(M: float) -> int:
    return int(math.ceil(20 + M / math.log(10.0)))


def euler_sum_mp(fac: EulerFactor, d: float, ctx: QContext, x: LogPoint,
                 cfg: QuadratureConfig = DEFAULT_CONFIG, turns: int = 0):
    """Plain quadrature on the ray d at x e^{2 pi i turns}, at a working
    precision sized to the cancellation; returns an mpmath complex."""
    if singular_directions([fac]).contains(d):
        raise SingularDirection(f"direction {d} hits the pole of a={fac.a}")
    M = (x.argument + TWO_PI * turns - d) ** 2 / (2.0 * ctx.logq)
    if cfg.dps is None:
        cfg = cfg.with_(dps=_auto_dps(M))
    if cfg.step is None:
        cfg = cfg.with_(step=_pole_safe_step(fac, d, x.argument + TWO_PI * turns, ctx.logq))
    # the tail test is relative to |S|, which can exceed the final useful
    # scale by e^M; tighten it to the working precision
    cfg = cfg.with_(tol=min(cfg.tol, 10.0 ** (10 - cfg.dps)))
    return laplace_numeric(euler_borel(fac), d, ctx, 1, x, cfg, as_mp=True, turns=turns)


def stokes_n_deviation(N: int, x: LogPoint, ctx: QContext,
                       cfg: QuadratureConfig = DEFAULT_CONFIG, plus_sign: bool = False):
    """Relative gap between S^0(E_1)(x) and S^0(E_1)(x e^{-2 pi i N}) plus the
    correction sum, with every term computed by direct quadrature at one
    working precision large enough for the far sheet.

    Returns (deviation, direct, reduced) with the values as complex numbers.
    """
    fac = EulerFactor(1.0)
    L = ctx.logq
    M = max(x.argument ** 2, (x.argument - TWO_PI * N) ** 2) / (2.0 * L)
    dps = _auto_dps(M)
    cfg = cfg.with_(dps=dps)
    with mpmath.workdps(dps):
        direct = euler_sum_mp(fac, 0.0, ctx, x, cfg)
        reduced = euler_sum_mp(fac, 0.0, ctx, x, cfg, turns=-N) \
            + stokes_n_correction(N, x, ctx, plus_sign)
        dev = abs(direct - reduced) / max(1, abs(direct))
        return float(dev), complex(direct), complex(reduced)


def euler_sum(fac: EulerFactor, d: float, ctx: QContext, x: LogPoint,
              cfg: QuadratureConfig = DEFAULT_CONFIG, method: str = "auto") -> complex:
    """S^d(E^{[m]}_{a,q})(x): the order-1 Laplace transform of the Borel
    transform along arg(xi) = d.

    When arg(x) is far from d the Laplace integrand oscillates with amplitude
    exp((arg x - d)^2 / (2 log q)) and a direct sum cancels catastrophically.
    ``method`` chooses how to deal with this:

    * ``"stokes"``: move x to the sheet inside the pole-free sector of d
      (paying the residue jumps), then rotate the ray next to arg(x);
    * ``"quadrature"``: integrate on the ray d as given, raising the working
      precision as needed;
    * ``"auto"``: plain quadrature unless the cancellation exceeds 1e6.
    """
    sing = singular_directions([fac])
    if sing.contains(d):
        raise SingularDirection(f"direction {d} hits the pole of a={fac.a}")
    phi = euler_borel(fac)
    L = ctx.logq
    delta = x.argument - d
    M = delta * delta / (2.0 * L)
    if method == "quadrature" or (method == "auto" and M <= math.log(_AUTO_CANCELLATION)):
        if method == "quadrature" and M > 20.0:
            return _mp_complex(euler_sum_mp(fac, d, ctx, x, cfg))
        return laplace_numeric(phi, d, ctx, 1, x, cfg)
    if method not in ("auto", "stokes", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    lo, hi = sing.sector(d)
    N = math.floor((x.argument - lo) / TWO_PI)
    x_base = x.rotate(-TWO_PI * N)
    delta_gap = min(0.75, (hi - lo) / 4.0)
    d_rot = min(max(x_base.argument, lo + delta_gap), hi - delta_gap)
    base = laplace_numeric(phi, d_rot, ctx, 1, x_base, cfg)
    if N == 0:
        return base
    return base + stokes_jump(fac, d, d + TWO_PI * N, ctx, x)


def euler_sum_function(fac: EulerFactor, d: float, ctx: QContext,
                       cfg: QuadratureConfig = DEFAULT_CONFIG,
                       method: str = "auto") -> LogFunction:
    """x -> S^d(E^{[m]}_{a,q})(x) as a LogFunction (pointwise loop)."""
    def fn(z):
        z = np.asarray(z, dtype=complex)
        return np.array([euler_sum(fac, d, ctx, LogPoint.from_log(w), cfg, method)
                         for w in z.ravel()], dtype=complex).reshape(z.shape)

    return LogFunction(fn, None, math.inf, f"S^{d}(E[{fac.m}]_{fac.a})")


def functional_residual(fac: EulerFactor, d: float, ctx: QContext, x: LogPoint,
                        cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """|x S(qx) + a S(x) - 1| for m = 0 (zero up to quadrature error)."""
    if fac.m != 0:
        raise ValueError("the inhomogeneous equation holds for m = 0 only")
    s_x = euler_sum(fac, d, ctx, x, cfg)
    s_qx = euler_sum(fac, d, ctx, x * ctx.q, cfg)
    return abs(x.value * s_qx + fac.a * s_x - 1.0)


# --- growth machinery -------------------------------------------------------------

def geometric_bound_sum(N: int, r0, lam: float):
    """f(N; r0, lam) = sum_{k=0}^{N-1} exp(lam (N - k + r0)^2), as mpmath complex."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    r0 = mpmath.mpmathify(r0)
    lam = mpmath.mpmathify(lam)
    return mpmath.fsum(mpmath.exp(lam * (N - k + r0) ** 2) for k in range(N))


def bound_ratio(N: int, r0, lam: float) -> float:
    """|f(N; r0, lam) exp(-lam (N + r0)^2)|."""
    r0m = mpmath.mpc(complex(r0).real, complex(r0).imag)
    lamm = mpmath.mpf(lam)
    ratio = mpmath.fsum(mpmath.exp(lamm * ((N - k + r0m) ** 2 - (N + r0m) ** 2))
                        for k in range(N))
    return float(abs(ratio))


@dataclass(frozen=True)
class SpiralRow:
    t: float
    N: int
    log_abs_sum: float
    bound_quantity: float
    shifted_quantity: float

    def as_dict(self) -> dict:
        return {"t": self.t, "N": self.N, "log_abs_sum": self.log_abs_sum,
                "log_inv_plus_t2": self.bound_quantity,
                "log_inv_plus_shifted_t2": self.shifted_quantity}


def euler1_sum_mp(ctx: QContext, x: LogPoint, cfg: QuadratureConfig = DEFAULT_CONFIG,
                  plus_sign: bool = False):
    """S^0(E_{1,q})(x) on any sheet: quadrature on the base sheet
    (-pi <= arg < pi) plus the closed-form correction sum.  Returns
    (value as mpmath complex, N)."""
    N = math.floor((x.argument + math.pi) / TWO_PI)
    base = euler_sum(EulerFactor(1.0), 0.0, ctx, x.rotate(-TWO_PI * N), cfg, "stokes")
    total = mpmath.mpc(base.real, base.imag) + stokes_n_correction(N, x, ctx, plus_sign)
    return total, N


def spiral_inverse_scan(ctx: QContext, r: float, t_grid: Sequence[float], d: float = 0.0,
                        cfg: QuadratureConfig = DEFAULT_CONFIG) -> list[SpiralRow]:
    """For each t: log|S^0(E_1)(r e^{it})|, the quantity log|1/S| + t^2/(2 log q)
    and the shifted quantity log|1/S| + (|t| - pi)^2/(2 log q)."""
    if d != 0.0:
        raise ValueError("the inverse scan is defined for the direction d = 0")
    if len(t_grid) == 0:
        raise ValueError("empty t grid")
    L = ctx.logq
    rows = []
    for t in t_grid:
        val, N = euler1_sum_mp(ctx, LogPoint(r, float(t)), cfg)
        la = float(mpmath.log(abs(val)))
        rows.append(SpiralRow(float(t), N, la, -la + t * t / (2 * L),
                              -la + (abs(t) - math.pi) ** 2 / (2 * L)))
    return rows


class InverseEulerSum(LogFunction):
    """x -> 1/S^0(E_{1,q})(x) with a log-safe ``log_abs`` for growth scans."""

    def __init__(self, ctx: QContext, cfg: QuadratureConfig = DEFAULT_CONFIG):
        self.ctx = ctx
        self.cfg = cfg
        super().__init__(self._values, None, math.inf, "1/S^0(E_1)")

    def _mp(self, w: complex):
        return euler1_sum_mp(self.ctx, LogPoint.from_log(w), self.cfg)[0]

    def _values(self, z):
        return np.array([complex(1 / self._mp(w)) for w in np.ravel(z)], dtype=complex)

    def log_abs(self, z):
        return np.array([-float(mpmath.log(abs(self._mp(w)))) for w in np.ravel(z)])


@dataclass(frozen=True)
class DecayReport:
    s: float
    s_prime: float
    fitted_coefficient: float
    measured_sigma: float
    convolution_sigma: float
    additive_sigma: float


def borel_decay_scan(s, s_prime: float, ctx: QContext, r: float, t_grid: Sequence[float],
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> DecayReport:
    """Angular decay of the order-s Borel transform of a function decaying
    like exp(-t^2 / (2 s' log q)) on spirals.

    The test function is f(x) = exp((log x)^2 / (2 s' log q)).  The decay of
    B(f) is fitted as exp(-t^2 / (2 sigma log q)).  ``convolution_sigma`` is the
    value a Gaussian convolution predicts, s' + 1/s when order s uses base
    q**(1/s); ``additive_sigma`` is the alternative constant 1/(s + s'),
    kept so that the measurement can tell the two apart.
    """
    L = ctx.logq
    k = as_order(s)
    c = 1.0 / (2.0 * s_prime * L)
    f = LogFunction(lambda z: np.exp(c * z * z), lambda z: mpmath.exp(c * z * z),
                    math.inf, "gaussian-decay")
    Lp = L / float(k)

    def transformed(z):
        out = []
        for w in np.ravel(z):
            xi = LogPoint.from_log(w)
            out.append(borel_numeric(f, xi.modulus * math.exp(0.5 * Lp), ctx, k, xi, cfg))
        return np.array(out, dtype=complex)

    table = growth_scan(LogFunction(transformed), "angular-spiral", t_grid, ctx, radius=r)
    coef = table.quadratic_coefficient()
    sigma = -1.0 / (2.0 * coef * L)
    kf = float(k)
    return DecayReport(kf, s_prime, coef, sigma, s_prime + 1.0 / kf, 1.0 / (kf + s_prime))
