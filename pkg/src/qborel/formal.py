"""Formal q-Borel and q-Laplace transforms of arbitrary positive rational order.

Order k acts through the effective base q**(1/k); the factor
q**(-n(n-1)/(2k)) is built as a single exponential so that no error
accumulates across long coefficient lists.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .qcore import FormalSeries, QContext, apply_sigma_q


def as_order(k) -> Fraction:
    """Coerce an int, float, string or Fraction to a positive reduced fraction."""
    if isinstance(k, float):
        k = Fraction(k).limit_denominator(10**6)
    k = Fraction(k)
    if k <= 0:
        raise ValueError(f"transform order must be positive, got {k}")
    return k


def _gauss_weights(n: int, ctx: QContext, k, sign: int) -> np.ndarray:
    idx = np.arange(n, dtype=float)
    return np.exp(sign * idx * (idx - 1.0) / 2.0 * ctx.logq / float(as_order(k)))


def qborel_formal(f: FormalSeries, ctx: QContext, k=1) -> FormalSeries:
    """Coefficient n multiplied by (q**(1/k))**(-n(n-1)/2)."""
    c = f.coefficients
    return FormalSeries(c * _gauss_weights(len(c), ctx, k, -1), f.order)


def qlaplace_formal(f: FormalSeries, ctx: QContext, k=1) -> FormalSeries:
    """Inverse of :func:`qborel_formal`."""
    c = f.coefficients
    return FormalSeries(c * _gauss_weights(len(c), ctx, k, +1), f.order)


def check_commutation(j: int, m: int, f: FormalSeries, ctx: QContext,
                      which: str = "borel") -> float:
    """Largest relative coefficient gap in the Borel (or Laplace) conjugation
    of ``x**j sigma_q**m``.

    Borel:   B(x^j s^m f)  = q^{-j(j-1)/2} xi^j s^{m-j} B(f)
    Laplace: L(xi^j s^m f) = q^{+j(j-1)/2} x^j  s^{m+j} L(f)
    """
    if which == "borel":
        transform, sign, dm = qborel_formal, -1, -j
    elif which == "laplace":
        transform, sign, dm = qlaplace_formal, +1, +j
    else:
        raise ValueError("which must be 'borel' or 'laplace'")
    lhs = transform(apply_sigma_q(f, ctx, m).shift(j), ctx)
    rhs = apply_sigma_q(transform(f, ctx), ctx, m + dm).shift(j)
    rhs = rhs * np.exp(sign * j * (j - 1) / 2.0 * ctx.logq)
    order = min(lhs.order, rhs.order)
    n = int(order) + 1
    a = lhs.coefficients[:n]
    b = rhs.coefficients[:n]
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)
