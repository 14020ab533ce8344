"""Error function and the upper incomplete gamma function of order 3/2.

erf is summed from its everywhere-positive series

    erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n (2 x^2)^n x / (2n + 1)!!

below ``_SWITCH`` and the scaled complement erfcx(x) = exp(x^2) erfc(x) comes
from the Laplace continued fraction above it.  Both are evaluated with a fixed
number of terms so that arrays are handled without per-element loops.

Γ(3/2, x) = sqrt(x) exp(-x) + sqrt(pi)/2 * erfc(sqrt(x)) is assembled from the
complement rather than from Γ(3/2) - sqrt(pi)/2 erf(sqrt(x)), which would
cancel catastrophically for large x.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ModelDomainError

SQRT_PI = math.sqrt(math.pi)
GAMMA_3_2 = 0.5 * SQRT_PI

_SWITCH = 2.0
_SERIES_TERMS = 64
_CF_DEPTH = 160


def _cf_depth(xmin):
    # depth reaching full double precision, measured against mpmath for x >= 2
    return min(_CF_DEPTH, int(12 + 200.0 / (xmin * xmin)))


def _erf_series(x):
    # valid and accurate for |x| <= _SWITCH
    if x.size == 0:
        return x.copy()
    x2 = 2.0 * x * x
    term = x.copy()
    total = x.copy()
    for n in range(1, _SERIES_TERMS):
        term = term * x2 / (2 * n + 1)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return 2.0 / SQRT_PI * np.exp(-x * x) * total


def _erfcx_cf(x):
    # valid for x >= _SWITCH; backward evaluation of the Laplace fraction
    if x.size == 0:
        return x.copy()
    f = x.copy()
    for n in range(_cf_depth(float(x.min())), 0, -1):
        f = x + (0.5 * n) / f
    return 1.0 / (SQRT_PI * f)


def _erf_series_scalar(x):
    x2 = 2.0 * x * x
    term = total = x
    for n in range(1, _SERIES_TERMS):
        term = term * x2 / (2 * n + 1)
        total += term
        if term <= 1e-17 * total:
            break
    return 2.0 / SQRT_PI * math.exp(-x * x) * total


def _erfcx_cf_scalar(x):
    f = x
    for n in range(_cf_depth(x), 0, -1):
        f = x + (0.5 * n) / f
    return 1.0 / (SQRT_PI * f)


def _erfcx_scalar(a):
    if a < _SWITCH:
        return math.exp(a * a) * (1.0 - _erf_series_scalar(a))
    return _erfcx_cf_scalar(a)


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def erf(x):
    """Error function, absolute error below 1e-15 on the real line."""
    if isinstance(x, (float, int)):
        a = abs(float(x))
        v = _erf_series_scalar(a) if a < _SWITCH else 1.0 - _erfcx_cf_scalar(a) * math.exp(-a * a)
        return math.copysign(v, x)
    a = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(a)
    small = a < _SWITCH
    out[small] = _erf_series(a[small])
    big = ~small
    out[big] = 1.0 - _erfcx_cf(a[big]) * np.exp(-a[big] ** 2)
    out = np.copysign(out, x)
    return _scalar_or_array(x, out)


def erfcx(x):
    """Scaled complementary error function exp(x^2) * erfc(x) for x >= 0."""
    if isinstance(x, (float, int)) and x >= 0:
        return _erfcx_scalar(float(x))
    a = np.asarray(x, dtype=float)
    if np.any(a < 0):
        raise ValueError("erfcx is only provided for non-negative arguments")
    out = np.empty_like(a)
    small = a < _SWITCH
    xs = a[small]
    out[small] = np.exp(xs * xs) * (1.0 - _erf_series(xs))
    out[~small] = _erfcx_cf(a[~small])
    return _scalar_or_array(x, out)


def erfc(x):
    """Complementary error function with relative accuracy kept in the tail."""
    a = np.asarray(x, dtype=float)
    pos = np.abs(a)
    out = erfcx(np.atleast_1d(pos)) * np.exp(-np.atleast_1d(pos) ** 2)
    out = np.where(np.atleast_1d(a) < 0, 2.0 - out, out)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(a.shape)


def _check_scalar(x):
    if isinstance(x, (float, int)):
        if not x >= 0:
            raise ModelDomainError("incomplete gamma argument must be >= 0")
        return True
    return False


def _check_nonneg(x):
    a = np.asarray(x, dtype=float)
    if np.any(np.isnan(a)) or np.any(a < 0):
        raise ModelDomainError("incomplete gamma argument must be >= 0")
    return a


def upper_gamma_3_2(x):
    """Γ(3/2, x), the upper incomplete gamma function of order 3/2.

    Decreases strictly from sqrt(pi)/2 at x = 0 towards zero.
    """
    if _check_scalar(x):
        s = math.sqrt(x)
        return s * math.exp(-x) + GAMMA_3_2 * _erfcx_scalar(s) * math.exp(-x)
    a = _check_nonneg(x)
    s = np.sqrt(a)
    out = s * np.exp(-a) + GAMMA_3_2 * erfc(np.atleast_1d(s)).reshape(a.shape)
    return _scalar_or_array(x, out)


def upper_gamma_3_2_scaled(x):
    """exp(x) * Γ(3/2, x); finite for arbitrarily large x (grows like sqrt(x))."""
    if _check_scalar(x):
        s = math.sqrt(x)
        return s + GAMMA_3_2 * _erfcx_scalar(s)
    a = _check_nonneg(x)
    s = np.sqrt(a)
    out = s + GAMMA_3_2 * erfcx(np.atleast_1d(s)).reshape(a.shape)
    return _scalar_or_array(x, out)


def upper_gamma_3_2_derivative(x):
    """d/dx Γ(3/2, x) = -sqrt(x) exp(-x)."""
    a = _check_nonneg(x)
    out = -np.sqrt(a) * np.exp(-a)
    return _scalar_or_array(x, out)
