"""Probe-grid agreement with a high-precision oracle (mpmath at 30 digits)."""

import mpmath
import numpy as np

from fdplens.normal import normal_cdf, normal_isf, normal_ppf, normal_sf

mpmath.mp.dps = 30

X_GRID = [-37.0, -10.0, -8.0, -5.0, -3.0, -2.0, -1.0, -0.5, -0.1, 0.0,
          0.1, 0.5, 1.0, 1.959963984540054, 3.0, 5.0, 8.0, 10.0, 37.0]
P_GRID = [1e-300, 1e-30, 1e-12, 1e-8, 1e-4, 0.01, 0.025, 0.2, 0.425, 0.5,
          0.575, 0.8, 0.975, 0.99, 1.0 - 1e-8, 1.0 - 1e-12]


def mp_cdf(x):
    return float(mpmath.erfc(-x / mpmath.sqrt(2)) / 2)


def mp_ppf(p):
    # solve log erfc(t) = log 2p in the lower tail; avoids 1 - 2p cancellation
    p = mpmath.mpf(p)
    upper = p > 0.5
    tail = 1 - p if upper else p
    target = mpmath.log(2 * tail)
    start = mpmath.sqrt(max(mpmath.mpf("1e-8"), -target))
    t = mpmath.findroot(lambda t: mpmath.log(mpmath.erfc(t)) - target, start)
    x = -float(mpmath.sqrt(2) * t)
    return -x if upper else x


def test_cdf_probe_grid():
    for x in X_GRID:
        assert abs(normal_cdf(x) - mp_cdf(x)) < 1e-10
        assert abs(normal_sf(x) - mp_cdf(-x)) < 1e-10


def test_sf_relative_accuracy_in_tail():
    for x in [5.0, 10.0, 20.0, 30.0]:
        ref = float(mpmath.erfc(x / mpmath.sqrt(2)) / 2)
        assert abs(normal_sf(x) - ref) <= 1e-12 * ref


def test_ppf_probe_grid():
    for p in P_GRID:
        assert abs(normal_ppf(p) - mp_ppf(p)) < 1e-10


def test_ppf_round_trip():
    ps = np.concatenate([10.0 ** np.arange(-12, 0, dtype=float),
                         np.linspace(0.01, 0.99, 99)])
    back = normal_cdf(normal_ppf(ps))
    assert np.max(np.abs(back - ps)) < 1e-12


def test_endpoints_and_validation():
    assert normal_ppf(0.0) == -np.inf
    assert normal_ppf(1.0) == np.inf
    assert normal_isf(0.5) == -normal_ppf(0.5)
    try:
        normal_ppf(1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range probability accepted")


def test_vector_and_scalar_agree():
    ps = np.array([1e-9, 0.3, 0.5, 0.9])
    vec = normal_ppf(ps)
    for i, p in enumerate(ps):
        assert vec[i] == normal_ppf(float(p))
