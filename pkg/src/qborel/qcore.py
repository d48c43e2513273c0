"""Foundational types: q-context, points of the log-Riemann surface, truncated
power series and q-difference operators.

A point of the Riemann surface of the logarithm is stored as (modulus, argument)
with the argument never reduced modulo 2*pi.  Everywhere in the numerical code a
point is identified with its single-valued logarithm ``ln|x| + i*arg(x)``, so
functions on the surface are plain functions of a complex log coordinate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DegenerateOperator

INF = math.inf


@dataclass(frozen=True)
class QContext:
    q: float
    logq: float

    def __init__(self, q: float, logq: float | None = None):
        if not q > 1.0:
            raise ValueError(f"q must be > 1, got {q!r}")
        object.__setattr__(self, "q", float(q))
        object.__setattr__(self, "logq", math.log(q) if logq is None else float(logq))

    @classmethod
    def from_logq(cls, logq: float) -> "QContext":
        if not logq > 0.0:
            raise ValueError("log(q) must be positive")
        return cls(math.exp(logq), logq)

    def rescaled(self, k) -> "QContext":
        """Context for base q**(1/k); log(q) is divided, never recomputed."""
        return QContext.from_logq(self.logq / float(k))


@dataclass(frozen=True)
class LogPoint:
    modulus: float
    argument: float

    def __post_init__(self):
        if not self.modulus > 0.0:
            raise ValueError(f"modulus must be positive, got {self.modulus!r}")
        if not math.isfinite(self.argument):
            raise ValueError("argument must be finite")

    @classmethod
    def from_log(cls, z: complex) -> "LogPoint":
        z = complex(z)
        return cls(math.exp(z.real), z.imag)

    @classmethod
    def from_complex(cls, z: complex) -> "LogPoint":
        """Lift a nonzero complex number to the principal sheet."""
        z = complex(z)
        if z == 0:
            raise ValueError("0 is not a point of the log-Riemann surface")
        return cls(abs(z), cmath.phase(z))

    @property
    def log(self) -> complex:
        return complex(math.log(self.modulus), self.argument)

    @property
    def value(self) -> complex:
        return cmath.rect(self.modulus, self.argument)

    def __mul__(self, other):
        if isinstance(other, LogPoint):
            return LogPoint.from_log(self.log + other.log)
        other = float(other)
        return LogPoint(self.modulus * other, self.argument)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LogPoint):
            return LogPoint.from_log(self.log - other.log)
        return LogPoint(self.modulus / float(other), self.argument)

    def inverse(self) -> "LogPoint":
        return LogPoint(1.0 / self.modulus, -self.argument)

    def sqrt(self) -> "LogPoint":
        # continuous on the surface: no branch cut
        return LogPoint(math.sqrt(self.modulus), self.argument / 2.0)

    def rotate(self, angle: float) -> "LogPoint":
        return LogPoint(self.modulus, self.argument + angle)


def as_log_array(points) -> np.ndarray:
    """Log coordinates of a LogPoint, a sequence of them, or an array of logs."""
    if isinstance(points, LogPoint):
        return np.array([points.log])
    arr = [p.log if isinstance(p, LogPoint) else complex(p) for p in np.ravel(points)]
    return np.asarray(arr, dtype=complex)


class FormalSeries:
    """Power series c_0 + c_1 x + ... known up to ``order`` (inclusive).

    ``order`` may be ``math.inf`` for an exact polynomial; the coefficient array
    then holds every nonzero coefficient.  Binary operations truncate to the
    smaller order.
    """

    __slots__ = ("_c", "order")

    def __init__(self, coefficients, order=None):
        c = np.array(coefficients, dtype=complex).ravel()
        if order is None:
            order = len(c) - 1
        if order != INF:
            order = int(order)
            if order < 0:
                raise ValueError("truncation order must be non-negative")
            if len(c) < order + 1:
                c = np.concatenate([c, np.zeros(order + 1 - len(c), dtype=complex)])
            c = c[: order + 1]
        elif len(c) == 0:
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        self._c = c
        self.order = order

    @classmethod
    def polynomial(cls, coefficients) -> "FormalSeries":
        return cls(coefficients, INF)

    @classmethod
    def zero(cls, order=INF) -> "FormalSeries":
        return cls([0.0], order)

    @classmethod
    def one(cls, order=INF) -> "FormalSeries":
        return cls([1.0], order)

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    @property
    def is_exact(self) -> bool:
        return self.order == INF

    def __len__(self):
        return len(self._c)

    def __getitem__(self, n: int) -> complex:
        if n < 0:
            return 0j
        if n > self.order:
            raise IndexError(f"coefficient {n} beyond truncation order {self.order}")
        return complex(self._c[n]) if n < len(self._c) else 0j

    def __repr__(self):
        shown = ", ".join(f"{c:.6g}" for c in self._c[:8])
        more = ", ..." if len(self._c) > 8 else ""
        return f"FormalSeries([{shown}{more}], order={self.order})"

    def valuation(self, tol: float = 0.0):
        """Index of the first nonzero coefficient, ``math.inf`` for zero."""
        nz = np.nonzero(np.abs(self._c) > tol)[0]
        return int(nz[0]) if len(nz) else INF

    def truncate(self, order) -> "FormalSeries":
        order = min(order, self.order)
        return FormalSeries(self._c[: int(order) + 1] if order != INF else self._c, order)

    def _padded(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        m = min(n, len(self._c))
        out[:m] = self._c[:m]
        return out

    def _binary_order(self, other):
        return min(self.order, other.order)

    def __add__(self, other):
        if not isinstance(other, FormalSeries):
            other = FormalSeries.polynomial([other])
        order = self._binary_order(other)
        n = (max(len(self._c), len(other._c)) if order == INF else order + 1)
        return FormalSeries(self._padded(n) + other._padded(n), order)

    __radd__ = __add__

    def __neg__(self):
        return FormalSeries(-self._c, self.order)

    def __sub__(self, other):
        return self + (-other if isinstance(other, FormalSeries) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FormalSeries):
            return series_mul(self, other)
        return FormalSeries(self._c * complex(other), self.order)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FormalSeries(self._c / complex(scalar), self.order)

    def shift(self, j: int) -> "FormalSeries":
        """Multiply by x**j; negative j needs valuation >= -j."""
        if j >= 0:
            c = np.concatenate([np.zeros(j, dtype=complex), self._c])
            return FormalSeries(c, self.order + j if self.order != INF else INF)
        if self.valuation() < -j:
            raise ValueError(f"valuation {self.valuation()} too small to divide by x^{-j}")
        order = self.order + j if self.order != INF else INF
        if order != INF and order < 0:
            raise ValueError("shift leaves no known coefficients")
        return FormalSeries(self._c[-j:], order)

    def __call__(self, x):
        """Evaluate the (truncated) series at complex x; vectorized (Horner)."""
        x = np.asarray(x, dtype=complex)
        acc = np.zeros_like(x)
        for c in self._c[::-1]:
            acc = acc * x + c
        return acc

    def allclose(self, other: "FormalSeries", rtol=1e-12, atol=0.0) -> bool:
        order = self._binary_order(other)
        n = (max(len(self._c), len(other._c)) if order == INF else order + 1)
        return bool(np.allclose(self._padded(n), other._padded(n), rtol=rtol, atol=atol))

    def sigma(self, ctx: QContext, m: int = 1) -> "FormalSeries":
        return apply_sigma_q(self, ctx, m)


def series_mul(f: FormalSeries, g: FormalSeries) -> FormalSeries:
    """Cauchy product truncated to the smaller order."""
    order = min(f.order, g.order)
    prod = np.convolve(f.coefficients, g.coefficients)
    if order != INF:
        prod = prod[: order + 1]
    return FormalSeries(prod, order)


def apply_sigma_q(f: FormalSeries, ctx: QContext, m: int = 1) -> FormalSeries:
    """Coefficient n scaled by q**(m*n); negative m allowed."""
    n = np.arange(len(f.coefficients))
    return FormalSeries(f.coefficients * np.exp(m * n * ctx.logq), f.order)


def series_exp(f: FormalSeries) -> FormalSeries:
    """exp(f) for a truncated series, via n g_n = sum_k k f_k g_{n-k}."""
    if f.order == INF:
        raise ValueError("series_exp needs a finite truncation order")
    c = f.coefficients
    g = np.zeros(len(c), dtype=complex)
    g[0] = cmath.exp(c[0])
    k = np.arange(len(c))
    for n in range(1, len(c)):
        g[n] = np.dot(k[1 : n + 1] * c[1 : n + 1], g[n - 1 :: -1][:n]) / n
    return FormalSeries(g, f.order)


class QDifferenceOperator:
    """L = sum_j a_j sigma_q^j with series coefficients a_j."""

    def __init__(self, terms: Mapping[int, FormalSeries]):
        clean = {}
        for j, a in terms.items():
            j = int(j)
            if j < 0:
                raise DegenerateOperator("shift exponents must be non-negative")
            if not isinstance(a, FormalSeries):
                a = FormalSeries.polynomial(a)
            clean[j] = a
        if not clean:
            raise DegenerateOperator("operator needs at least one term")
        self.terms = dict(sorted(clean.items()))

    @property
    def degree(self) -> int:
        return max(self.terms)

    def __repr__(self):
        return f"QDifferenceOperator({self.terms!r})"

    def apply(self, f: FormalSeries, ctx: QContext) -> FormalSeries:
        return operator_apply(self, f, ctx)

    def compose(self, other: "QDifferenceOperator", ctx: QContext) -> "QDifferenceOperator":
        """self * other, using sigma_q(b) sigma_q^j = ... i.e. sigma^i b = sigma^i(b) sigma^i."""
        out: dict[int, FormalSeries] = {}
        for i, a in self.terms.items():
            for j, b in other.terms.items():
                term = a * apply_sigma_q(b, ctx, i)
                out[i + j] = out[i + j] + term if i + j in out else term
        return QDifferenceOperator(out)


def operator_apply(L: QDifferenceOperator, f: FormalSeries, ctx: QContext) -> FormalSeries:
    acc = None
    for j, a in L.terms.items():
        term = a * apply_sigma_q(f, ctx, j)
        acc = term if acc is None else acc + term
    return acc


# --- JSON literal formats ----------------------------------------------------

def _parse_scalar(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex literal must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def series_from_json(obj) -> FormalSeries:
    """A JSON array of [re, im] pairs is an exact polynomial; an object
    ``{"coefficients": [...], "order": N}`` is a truncated series."""
    if isinstance(obj, dict):
        coeffs = [_parse_scalar(v) for v in obj["coefficients"]]
        order = obj.get("order")
        return FormalSeries(coeffs, INF if order is None else int(order))
    return FormalSeries.polynomial([_parse_scalar(v) for v in obj])


def series_to_json(f: FormalSeries):
    coeffs = [[float(c.real), float(c.imag)] for c in f.coefficients]
    if f.is_exact:
        return coeffs
    return {"coefficients": coeffs, "order": int(f.order)}


def operator_from_json(obj) -> QDifferenceOperator:
    if not isinstance(obj, dict):
        raise DegenerateOperator("operator literal must be a JSON object {\"j\": series}")
    return QDifferenceOperator({int(j): series_from_json(s) for j, s in obj.items()})


def operator_to_json(L: QDifferenceOperator) -> dict:
    return {str(j): series_to_json(a) for j, a in L.terms.items()}
