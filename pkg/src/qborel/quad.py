"""Analytic q-Laplace and q-Borel transforms by trapezoid quadrature in the log
variable, plus empirical growth scans.

Functions on the log-Riemann surface are passed as :class:`LogFunction`
objects: vectorized callables of the log coordinate ``z = log(xi)``.  The
optional ``mp`` attribute is a scalar mpmath version used when a config asks
for extended working precision.

After the substitution xi = exp(u + i d) the Laplace kernel is an exact
Gaussian in u with standard deviation sqrt(log q'), so the trapezoid rule on a
uniform grid converges faster than any power of the step.  Grids sit on the
absolute lattice ``u = j * step`` so that repeated transforms of the same
function revisit identical nodes (useful with :class:`Memoized`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import mpmath
import numpy as np

from .errors import NonFinite, WindowExhausted
from .formal import as_order
from .qcore import LogPoint, QContext


class LogFunction:
    """A function on the log-Riemann surface, evaluated at log coordinates."""

    def __init__(self, fn: Callable, mp: Optional[Callable] = None,
                 radius: float = math.inf, name: str = ""):
        self.fn = fn
        self.mp = mp
        self.radius = radius
        self.name = name

    def __call__(self, z):
        return np.asarray(self.fn(np.asarray(z, dtype=complex)), dtype=complex)

    def at(self, x: LogPoint) -> complex:
        return complex(self(np.array([x.log]))[0])

    def __repr__(self):
        return f"LogFunction({self.name or self.fn!r})"


def on_plane(g: Callable, mp_g: Optional[Callable] = None,
             radius: float = math.inf, name: str = "") -> LogFunction:
    """Lift a single-valued function of xi to the log surface."""
    mp = None if mp_g is None else (lambda z: mp_g(mpmath.exp(z)))
    return LogFunction(lambda z: g(np.exp(z)), mp, radius, name)


def monomial(n: int) -> LogFunction:
    """xi**n, continued along the surface (exact in log form)."""
    return LogFunction(lambda z: np.exp(n * z), lambda z: mpmath.exp(n * z),
                       math.inf, f"xi^{n}")


class Memoized(LogFunction):
    """Caches values by exact log coordinate; pairs well with lattice grids."""

    def __init__(self, inner: LogFunction):
        super().__init__(inner.fn, inner.mp, inner.radius, inner.name)
        self.inner = inner
        self.cache: dict[complex, complex] = {}

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        missing = [w for w in dict.fromkeys(flat.tolist()) if w not in self.cache]
        if missing:
            vals = self.inner(np.array(missing, dtype=complex))
            self.cache.update(zip(missing, vals.tolist()))
        return np.array([self.cache[w] for w in flat.tolist()], dtype=complex).reshape(z.shape)


@dataclass(frozen=True)
class QuadratureConfig:
    """Trapezoid settings.  ``None`` step/window are derived from log q'."""

    step: Optional[float] = None
    tol: float = 1e-10
    max_window: Optional[float] = None
    blocks: int = 3
    block_size: int = 16
    dps: Optional[int] = None

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.blocks < 1 or self.block_size < 1:
            raise ValueError("blocks and block_size must be positive")
        if self.max_window is not None and self.step is not None \
                and self.max_window < 10 * self.step:
            raise ValueError("max_window must be at least 10 * step")

    def resolve(self, logq_eff: float) -> tuple[float, float]:
        s = math.sqrt(logq_eff)
        h = self.step if self.step is not None else 0.1 * s
        w = self.max_window if self.max_window is not None else 60.0 * s
        if w < 10 * h:
            raise ValueError("max_window must be at least 10 * step")
        return h, w

    def with_(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = QuadratureConfig()


def _check_finite(values):
    if not np.all(np.isfinite(values)):
        raise NonFinite("integrand returned a non-finite value")


def _adaptive_sum(terms: Callable, center: float, h: float, window: float,
                  cfg: QuadratureConfig, mp_mode: bool):
    """Sum ``terms(j)`` over lattice indices j, growing outward from the node
    nearest ``center``; the right side is extended first, then the left.

    A side stops once its last ``cfg.blocks`` blocks each carry an absolute
    mass below ``tol * |sum|``.  Because cancellation can make the running
    sum transiently larger than the final one, the stop test is repeated
    against the final sum and sides are re-opened if it fails.
    """
    j0 = int(round(center / h))
    nmax = int(math.ceil(window / h))
    bs = cfg.block_size
    zero = mpmath.mpc(0) if mp_mode else 0j
    total = zero
    # side state: next offset, block masses
    sides = {+1: [0, []], -1: [1, []]}

    def block(sign):
        start = sides[sign][0]
        if start > nmax:
            raise WindowExhausted(
                f"quadrature window {window:.3g} exhausted before the tail became negligible")
        offs = np.arange(start, start + bs)
        idx = j0 + sign * offs
        vals = terms(idx)
        if mp_mode:
            s = mpmath.fsum(vals)
            mass = mpmath.fsum(abs(v) for v in vals)
        else:
            _check_finite(vals)
            s = complex(np.sum(vals))
            mass = float(np.sum(np.abs(vals)))
        sides[sign][0] = start + bs
        sides[sign][1].append(mass)
        return s

    def done(sign, ref):
        masses = sides[sign][1]
        if len(masses) < cfg.blocks:
            return False
        return all(m <= cfg.tol * ref for m in masses[-cfg.blocks:])

    while True:
        for sign in (+1, -1):
            while not done(sign, abs(total)):
                total += block(sign)
        if done(+1, abs(total)) and done(-1, abs(total)):
            return total


def laplace_numeric(phi: LogFunction, d: float, ctx: QContext, k, x: LogPoint,
                    cfg: QuadratureConfig = DEFAULT_CONFIG, as_mp: bool = False,
                    turns: int = 0):
    """Order-k q-Laplace transform of ``phi`` along the ray arg(xi) = d at x.

    The transform is evaluated at x e^{2 pi i turns}.  In extended precision
    the turns are added with a full-precision pi, so sheet-shifted values
    stay consistent with closed forms computed at the same precision.
    With ``cfg.dps`` set and ``as_mp=True`` the value is returned as an
    mpmath complex (for callers that cancel it against other large terms).
    """
    if turns and cfg.dps is None:
        x = x.rotate(2.0 * math.pi * turns)
        turns = 0
    Lp = ctx.logq / float(as_order(k))
    h, window = cfg.resolve(Lp)
    X = x.log - 0.5 * Lp
    center = X.real
    norm = h / math.sqrt(2.0 * math.pi * Lp)
    if cfg.dps is None:
        delta = X.imag - d
        M = delta * delta / (2.0 * Lp)

        def terms(idx):
            u = idx * h
            z = u + 1j * d
            e = -((X - z) ** 2) / (2.0 * Lp) - M
            return np.exp(e) * phi(z)

        s = _adaptive_sum(terms, center, h, window, cfg, False)
        return _finish(s * norm, M)
    if phi.mp is None:
        raise ValueError("extended precision needs a function with an mp version")
    with mpmath.workdps(cfg.dps):
        # rebuild the exponent from the exact double inputs at full precision
        kf = as_order(k)
        two_L = 2 * mpmath.mpf(ctx.logq) * kf.denominator / kf.numerator
        Xm = mpmath.mpc(mpmath.log(x.modulus), x.argument) - two_L / 4 \
            + 2j * mpmath.pi * turns
        dm = mpmath.mpf(d)
        hm = mpmath.mpf(h)

        def terms_mp(idx):
            out = []
            for j in idx.tolist():
                z = mpmath.mpc(j * hm, dm)
                out.append(mpmath.exp(-((Xm - z) ** 2) / two_L) * phi.mp(z))
            return out

        s = _adaptive_sum(terms_mp, center, h, window, cfg, True)
        val = s * hm / mpmath.sqrt(mpmath.pi * two_L)
        return val if as_mp else _mp_to_complex(val)


def borel_numeric(f: LogFunction, r: float, ctx: QContext, k, xi: LogPoint,
                  cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Order-k q-Borel transform of ``f`` at xi over the spiral of radius r.

    The spiral x = r q'^{it} is parameterized by tau = arg(x); the integrand
    is a Gaussian in tau centred at arg(xi).
    """
    if not r > 0:
        raise ValueError("spiral radius must be positive")
    Lp = ctx.logq / float(as_order(k))
    h, window = cfg.resolve(Lp)
    A = math.log(r) - 0.5 * Lp - xi.log
    center = -A.imag
    norm = h / math.sqrt(2.0 * math.pi * Lp)
    lr = math.log(r)
    if cfg.dps is None:
        M = A.real * A.real / (2.0 * Lp)

        def terms(idx):
            tau = idx * h
            e = (A + 1j * tau) ** 2 / (2.0 * Lp) - M
            return np.exp(e) * f(lr + 1j * tau)

        s = _adaptive_sum(terms, center, h, window, cfg, False)
        return _finish(s * norm, M)
    if f.mp is None:
        raise ValueError("extended precision needs a function with an mp version")
    with mpmath.workdps(cfg.dps):
        Am = mpmath.mpc(A.real, A.imag)
        two_L = 2 * mpmath.mpf(Lp)
        hm = mpmath.mpf(h)
        lrm = mpmath.log(r)

        def terms_mp(idx):
            out = []
            for j in idx.tolist():
                tau = j * hm
                out.append(mpmath.exp((Am + 1j * tau) ** 2 / two_L)
                           * f.mp(mpmath.mpc(lrm, tau)))
            return out

        s = _adaptive_sum(terms_mp, center, h, window, cfg, True)
        return _mp_to_complex(s * hm / mpmath.sqrt(mpmath.pi * two_L))


def _finish(scaled: complex, M: float) -> complex:
    if M > 700.0:
        raise NonFinite(f"result scale e^{M:.1f} exceeds double range; use extended precision")
    out = scaled * math.exp(M)
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise NonFinite("quadrature result is not finite")
    return out


def _mp_to_complex(v) -> complex:
    out = complex(v)
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise NonFinite("quadrature result is not finite in double precision")
    return out


def choose_borel_radius(xi: LogPoint, ctx: QContext, k=1,
                        declared_radius: float = math.inf) -> float:
    """Spiral radius for :func:`borel_numeric`.

    Taking r = |xi| sqrt(q') centres the kernel exactly (no exponential
    cancellation); it is capped at half the declared domain radius.
    """
    Lp = ctx.logq / float(as_order(k))
    ideal = xi.modulus * math.exp(0.5 * Lp)
    return min(ideal, 0.5 * declared_radius)


def saddle_radius(xi: LogPoint, ctx: QContext, k=1, n: float = 0.0) -> float:
    """Spiral radius that puts the saddle of the Borel integrand of a function
    growing like x**n on the real tau axis (r = |xi| q'^(1/2 - n))."""
    Lp = ctx.logq / float(as_order(k))
    return xi.modulus * math.exp((0.5 - n) * Lp)


# --- growth scans -------------------------------------------------------------

@dataclass(frozen=True)
class GrowthTable:
    kind: str
    parameter: np.ndarray
    log_abs: np.ndarray

    def quadratic_coefficient(self) -> float:
        return fit_quadratic(self.parameter, self.log_abs)[2]

    def rows(self):
        return [(float(p), float(v)) for p, v in zip(self.parameter, self.log_abs)]


def fit_quadratic(t, y) -> np.ndarray:
    """Least-squares coefficients (c0, c1, c2) of y ~ c0 + c1 t + c2 t^2."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 3:
        raise ValueError("a quadratic fit needs at least three samples")
    coeffs = np.polynomial.polynomial.polyfit(t, y, 2)
    return coeffs


def growth_scan(f, kind: str, grid, ctx: QContext, *, radius: float = 1.0,
                direction: float = 0.0) -> GrowthTable:
    """Sample log|f| along a spiral (parameter = argument t at fixed radius)
    or a ray (parameter = log|xi| at fixed direction).

    ``f`` may expose ``log_abs`` (a vectorized map from log coordinates to
    log|f|) for values beyond double range.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty scan grid")
    if kind == "angular-spiral":
        z = math.log(radius) + 1j * grid
    elif kind == "radial-ray":
        z = grid + 1j * direction
    else:
        raise ValueError("kind must be 'angular-spiral' or 'radial-ray'")
    log_abs = getattr(f, "log_abs", None)
    if log_abs is not None:
        vals = np.asarray(log_abs(z), dtype=float)
    else:
        with np.errstate(divide="ignore"):
            vals = np.log(np.abs(np.asarray(f(z), dtype=complex)))
    if not np.all(np.isfinite(vals)):
        raise NonFinite("growth scan produced a non-finite sample")
    return GrowthTable(kind, grid, vals)
