"""The Gaussian q-kernel

    e_q(x) = (2 pi log q)**(-1/2) * exp(-(log(q**(1/2) x))**2 / (2 log q))

evaluated on the log-Riemann surface.  Values are carried in exponent form;
on far sheets the real part of the exponent reaches several thousand.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite
from .qcore import LogPoint, QContext


@dataclass(frozen=True)
class KernelValue:
    log_value: complex

    @property
    def value(self) -> complex:
        """exp(log_value); raises NonFinite when it would overflow a double."""
        if self.log_value.real > 700.0:
            raise NonFinite(
                f"kernel magnitude e^{self.log_value.real:.1f} overflows; use log_value")
        return cmath.exp(self.log_value)


def log_eq(logx, logq: float):
    """Vectorized log of e_q at points given by their log coordinate."""
    logx = np.asarray(logx, dtype=complex)
    w = logx + 0.5 * logq
    return -0.5 * math.log(2.0 * math.pi * logq) - w * w / (2.0 * logq)


def eq_kernel(x: LogPoint, ctx: QContext) -> KernelValue:
    return KernelValue(complex(log_eq(x.log, ctx.logq)))


def _log_eq_point(x: LogPoint, logq: float) -> complex:
    return complex(log_eq(x.log, logq))


def kernel_identity_residual(xi1: LogPoint, xi2: LogPoint, x: LogPoint,
                             ctx: QContext) -> float:
    """|log lhs - log rhs| for the two-kernel factorization

    e_q(xi1/x) e_q(xi2/x) = e_{q^2}(xi/q) e_{q^{1/2}}(zeta/x),
    xi = xi1/xi2, zeta = q^{1/4} sqrt(xi1 xi2).
    """
    L = ctx.logq
    lhs = _log_eq_point(xi1 / x, L) + _log_eq_point(xi2 / x, L)
    xi = xi1 / xi2
    zeta = (xi1 * xi2).sqrt() * math.exp(L / 4.0)
    rhs = _log_eq_point(xi / math.exp(L), 2.0 * L) + _log_eq_point(zeta / x, L / 2.0)
    return abs(lhs - rhs)


def halfpower_kernel_residual(u: LogPoint, ctx: QContext) -> float:
    """|log lhs - log rhs| for e_{q^2}(u^2/q) = e_{q^{1/2}}(u/q^{1/4}) / 2."""
    L = ctx.logq
    lhs = _log_eq_point((u * u) / math.exp(L), 2.0 * L)
    rhs = _log_eq_point(u / math.exp(L / 4.0), L / 2.0) - math.log(2.0)
    return abs(lhs - rhs)
