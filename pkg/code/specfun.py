"""Bessel functions J0 and J1 of a nonnegative real argument, and the first
zero of J0.

Two regimes:
  x <= SWITCHOVER: the ascending power series, summed until the terms drop
    below double precision.
  x >  SWITCHOVER: Miller's backward recurrence on J_n(x), normalized with
    the identity J_0 + 2 * sum_k J_2k = 1.

Y0/Y1 are not needed anywhere: the radial profile is regular at the origin.
"""

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from errors import ValidationError

SWITCHOVER = 12.0
_SERIES_TERMS = 60
_RESCALE = 1e200


def _check_argument(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError("Bessel argument must be finite, got %r" % x)
    if x < 0:
        raise ValidationError("Bessel argument must be nonnegative, got %r" % x)
    return x


def _j0_series(x):
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, _SERIES_TERMS):
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def _j1_series(x):
    q = -0.25 * x * x
    term = 0.5 * x
    total = term
    for k in range(1, _SERIES_TERMS):
        term *= q / (k * (k + 1))
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def _j01_recurrence(x):
    """Returns (J0(x), J1(x)) by downward recurrence from an order well above x."""
    start = 2 * ((int(x) + int(math.sqrt(60.0 * x)) + 20) // 2)
    two_over_x = 2.0 / x
    j_next = 0.0  # J_{n+1}
    j_curr = 1e-30  # J_n, arbitrary scale
    even_sum = 0.0
    j1 = 0.0
    for n in range(start, 0, -1):
        j_prev = n * two_over_x * j_curr - j_next
        j_next, j_curr = j_curr, j_prev
        # j_curr now holds J_{n-1}
        if n - 1 == 1:
            j1 = j_curr
        elif n - 1 > 0 and (n - 1) % 2 == 0:
            even_sum += j_curr
        if abs(j_curr) > _RESCALE:
            j_curr /= _RESCALE
            j_next /= _RESCALE
            even_sum /= _RESCALE
            j1 /= _RESCALE
    norm = j_curr + 2.0 * even_sum
    return j_curr / norm, j1 / norm


def _scalar_j0(x):
    x = _check_argument(x)
    if x <= SWITCHOVER:
        return _j0_series(x)
    return _j01_recurrence(x)[0]


def _scalar_j1(x):
    x = _check_argument(x)
    if x <= SWITCHOVER:
        return _j1_series(x)
    return _j01_recurrence(x)[1]


_vector_j0 = np.vectorize(_scalar_j0, otypes=[float])
_vector_j1 = np.vectorize(_scalar_j1, otypes=[float])


def bessel_j0(x):
    """J0(x) for x >= 0. Accepts a float or an array; arrays are evaluated elementwise."""
    if np.ndim(x) == 0:
        return _scalar_j0(x)
    return _vector_j0(np.asarray(x, dtype=float))


def bessel_j1(x):
    """J1(x) for x >= 0. Accepts a float or an array; arrays are evaluated elementwise."""
    if np.ndim(x) == 0:
        return _scalar_j1(x)
    return _vector_j1(np.asarray(x, dtype=float))


@lru_cache(maxsize=None)
def first_j0_zero():
    """The first positive zero j_{0,0} of J0 (about 2.404825557695773)."""
    return brentq(_scalar_j0, 2.0, 3.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
