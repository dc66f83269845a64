"""Standard normal CDF, survival function, and quantiles.

The CDF goes through the complementary error function; the quantile is
Wichura's PPND16 rational approximation (algorithm AS 241), good to full
double precision.  Both are pinned by a probe-grid test against a
high-precision oracle rather than by trusting any one library.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

__all__ = ["normal_cdf", "normal_sf", "normal_ppf", "normal_isf"]

_SQRT2 = float(np.sqrt(2.0))

# AS 241 PPND16 coefficients (central, middle, and far-tail branches).
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, r):
    acc = np.full_like(r, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * r + c
    return acc


def normal_cdf(x):
    """P(Z <= x) for Z standard normal."""
    return 0.5 * erfc(-np.asarray(x, dtype=np.float64) / _SQRT2)


def normal_sf(x):
    """P(Z > x); accurate deep into the upper tail."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / _SQRT2)


def normal_ppf(p):
    """Quantile of the standard normal (AS 241).  p in [0, 1]; 0 and 1 map to -/+inf."""
    arr = np.asarray(p, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any((arr < 0.0) | (arr > 1.0) | np.isnan(arr)):
        raise ValueError("probabilities must lie in [0, 1]")
    out = np.empty_like(arr)
    out[arr == 0.0] = -np.inf
    out[arr == 1.0] = np.inf
    inner = (arr > 0.0) & (arr < 1.0)
    pi = arr[inner]
    q = pi - 0.5
    res = np.empty_like(pi)

    central = np.abs(q) <= 0.425
    if central.any():
        r = 0.180625 - q[central] * q[central]
        res[central] = q[central] * _poly(_A, r) / _poly(_B, r)
    tails = ~central
    if tails.any():
        qt = q[tails]
        pt = np.where(qt < 0.0, pi[tails], 1.0 - pi[tails])
        r = np.sqrt(-np.log(pt))
        near = r <= 5.0
        val = np.empty_like(r)
        if near.any():
            rn = r[near] - 1.6
            val[near] = _poly(_C, rn) / _poly(_D, rn)
        far = ~near
        if far.any():
            rf = r[far] - 5.0
            val[far] = _poly(_E, rf) / _poly(_F, rf)
        res[tails] = np.where(qt < 0.0, -val, val)

    out[inner] = res
    return float(out[0]) if scalar else out


def normal_isf(p):
    """Upper-tail quantile: x with P(Z > x) = p."""
    return -normal_ppf(p)
