"""Standard-normal CDF, density and quantile.

The CDF is evaluated through erfc (absolute error well below 1e-12 over the
whole line).  The quantile uses Acklam's rational approximation refined by a
single Halley step against the erfc-based CDF, which brings the absolute
error below 1e-9 everywhere on (0, 1); in practice it is near machine
precision except in the extreme tails.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

from .errors import ValidationError

SQRT2 = float(np.sqrt(2.0))
INV_SQRT_2PI = 1.0 / float(np.sqrt(2.0 * np.pi))

# Acklam coefficients for the rational initial guess.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)

_P_LOW = 0.02425


def norm_cdf(x):
    """Phi(x), vectorized; accepts scalars or arrays."""
    x_arr = np.asarray(x, dtype=float)
    out = 0.5 * _sp.erfc(-x_arr / SQRT2)
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(out)
    return out


def norm_pdf(x):
    """phi(x), vectorized."""
    x_arr = np.asarray(x, dtype=float)
    out = INV_SQRT_2PI * np.exp(-0.5 * x_arr * x_arr)
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(out)
    return out


def _acklam(p: np.ndarray) -> np.ndarray:
    z = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)

    if np.any(lo):
        q = np.sqrt(-2.0 * np.log(p[lo]))
        z[lo] = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                 / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if np.any(hi):
        q = np.sqrt(-2.0 * np.log(1.0 - p[hi]))
        z[hi] = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                  / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        z[mid] = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
                  / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    return z


def norm_quantile(t):
    """Phi^{-1}(t) for t in (0, 1), vectorized.

    Raises ValueError outside the open interval.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0) or np.any(t_arr >= 1.0):
        raise ValidationError("quantile argument must lie strictly inside (0, 1)")
    z = _acklam(np.atleast_1d(t_arr).astype(float))
    # One Halley step against the erfc-based CDF.
    tt = np.atleast_1d(t_arr)
    err = 0.5 * _sp.erfc(-z / SQRT2) - tt
    pdf = INV_SQRT_2PI * np.exp(-0.5 * z * z)
    u = err / pdf
    z = z - u / (1.0 + 0.5 * z * u)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(z[0])
    return z.reshape(t_arr.shape)
