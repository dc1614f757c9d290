"""Exact optimal reinforcement of the unit disk.

On the unit disk the optimal pair (theta, u) is radial. The eigenfunction is a
Bessel profile c1 * J0(sqrt(lambda1) * r) on the unreinforced core [0, a_bar]
and the cone 1 - r on the reinforced annulus [a_bar, 1], where |u'| = 1. The
PDE coefficient is 1 + m * theta and the mass constraint reads
2 * pi * int_0^1 theta(r) r dr = L.

Given lambda1 and m, a_bar is the root of the smooth-fit condition (inner and
outer slopes agree at a_bar) and L follows from the mass identity

    lambda1 = 12 * (m L / (2 pi) + (a - 1)^2 / 2) / (1 - 6a^2 + 8a^3 - 3a^4).
"""

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from errors import NumericalError, ValidationError
from fem import DensityField
from specfun import bessel_j0, bessel_j1, first_j0_zero

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-10, limit=200)
_RAYLEIGH_GRID = 64
_THETA_TOL = 1e-10


@dataclass(frozen=True)
class RadialOptimum:
    """Optimal radial pair for a given eigenvalue and stiffness.

    Fields:
      lambda1: the optimal first eigenvalue
      m: stiffness coefficient
      a_bar: transition radius between the Bessel core and the cone
      mass_L: total reinforcement mass int theta dx
      c1: amplitude of the core profile, (1 - a_bar) / J0(a_bar sqrt(lambda1))
      c0: tail coefficient of theta, a_bar (1 + lambda1 a_bar^2 / 3 - lambda1 a_bar / 2)
      rayleigh_argmin: minimizer of radial_rayleigh over a (nan if not computed)
    """
    lambda1: float
    m: float
    a_bar: float
    mass_L: float
    c1: float
    c0: float
    rayleigh_argmin: float = field(default=float("nan"), compare=False)

    @property
    def r_peak(self):
        """Radius where theta attains its maximum on [a_bar, 1]."""
        lam = self.lambda1

        def slope(r):
            return -2.0 * lam * r / 3.0 + 0.5 * lam - self.c0 / (r * r)

        lo, hi = self.a_bar, 1.0
        if slope(lo) <= 0:
            return lo
        if slope(hi) >= 0:
            return hi
        return brentq(slope, lo, hi, xtol=1e-14)


def make_optimum(lambda1, m, a_bar, mass_L, rayleigh_argmin=float("nan")):
    """Builds a RadialOptimum, deriving c1 and c0 from (lambda1, a_bar)."""
    if not 0.0 < a_bar < 1.0:
        raise ValidationError("Transition radius must lie in (0, 1), got %r" % a_bar)
    if m <= 0:
        raise ValidationError("Stiffness m must be positive, got %r" % m)
    j0 = bessel_j0(a_bar * math.sqrt(lambda1))
    if j0 == 0.0:
        raise NumericalError("J0(a sqrt(lambda1)) vanishes at a = %r" % a_bar)
    c1 = (1.0 - a_bar) / j0
    c0 = a_bar * (1.0 + lambda1 * a_bar ** 2 / 3.0 - lambda1 * a_bar / 2.0)
    return RadialOptimum(lambda1, m, a_bar, mass_L, c1, c0, rayleigh_argmin)


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < 0.0) or np.any(r > 1.0):
        raise ValidationError("Radius must lie in [0, 1]")
    return r


def _scalar_or_array(values, r):
    return float(values) if np.ndim(r) == 0 else values


def theta_profile(r, opt):
    """Optimal density theta(r); zero on the core, closed form on the annulus."""
    rr = _check_radius(r)
    lam = opt.lambda1
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = (-lam * rr ** 2 / 3.0 + lam * rr / 2.0 - 1.0 + opt.c0 / rr) / opt.m
    values = np.where(rr <= opt.a_bar, 0.0, tail)
    return _scalar_or_array(values, r)


def u_profile(r, opt, normalized=False):
    """Optimal eigenfunction; 1 - r on the annulus unless normalized.

    With normalized=True the profile is scaled to unit L2 norm on the disk.
    """
    rr = _check_radius(r)
    core = opt.c1 * bessel_j0(math.sqrt(opt.lambda1) * np.minimum(rr, opt.a_bar))
    values = np.where(rr <= opt.a_bar, core, 1.0 - rr)
    if normalized:
        values = values / profile_l2_norm(opt)
    return _scalar_or_array(values, r)


def u_prime(r, opt):
    """Radial derivative of the unnormalized eigenfunction."""
    rr = _check_radius(r)
    s = math.sqrt(opt.lambda1)
    core = -opt.c1 * s * bessel_j1(s * np.minimum(rr, opt.a_bar))
    values = np.where(rr <= opt.a_bar, core, -1.0)
    return _scalar_or_array(values, r)


def profile_l2_norm(opt):
    """L2 norm of the unnormalized eigenfunction over the unit disk."""
    s = math.sqrt(opt.lambda1)
    core, _ = quad(lambda r: r * bessel_j0(s * r) ** 2, 0.0, opt.a_bar, **_QUAD_OPTS)
    a = opt.a_bar
    return math.sqrt(2.0 * math.pi * (opt.c1 ** 2 * core + _cone_moment(a)))


def _cone_moment(a):
    # int_a^1 r (1 - r)^2 dr
    return (1.0 - a) ** 3 * (1.0 + 3.0 * a) / 12.0


def _mass_denominator(a):
    # 1 - 6a^2 + 8a^3 - 3a^4 == (1 - a)^3 (1 + 3a)
    return 1.0 - 6.0 * a ** 2 + 8.0 * a ** 3 - 3.0 * a ** 4


def lambda_from_a(a, m, L):
    """Eigenvalue for which the annulus [a, 1] carries the mass L.

    This is the factor-12 form: integrating theta against 2 pi r dr reproduces it
    exactly, and the stiffness enters as m * L.
    """
    if not 0.0 < a < 1.0:
        raise ValidationError("Transition radius must lie in (0, 1), got %r" % a)
    if m <= 0:
        raise ValidationError("Stiffness m must be positive, got %r" % m)
    if L < 0:
        raise ValidationError("Mass L must be nonnegative, got %r" % L)
    den = _mass_denominator(a)
    if den <= 0.0:
        raise NumericalError("Transition radius %r is too close to 1: mass denominator is %r" % (a, den))
    return 12.0 * (m * L / (2.0 * math.pi) + 0.5 * (a - 1.0) ** 2) / den


def mass_from_a(a, lambda1, m):
    """Inverse of lambda_from_a in L."""
    return 2.0 * math.pi / m * (lambda1 * _mass_denominator(a) / 12.0 - 0.5 * (1.0 - a) ** 2)


def smooth_fit_residual(a, lambda1):
    """(1 - a) sqrt(lambda1) J1(a sqrt(lambda1)) / J0(a sqrt(lambda1)) - 1.

    Zero exactly when the slope of the Bessel core matches the slope -1 of the
    cone at r = a.
    """
    if lambda1 <= 0:
        raise ValidationError("Eigenvalue must be positive, got %r" % lambda1)
    s = math.sqrt(lambda1)
    j0 = bessel_j0(a * s)
    if j0 == 0.0:
        raise NumericalError("Smooth-fit residual is singular at a = %r (J0 vanishes)" % a)
    return (1.0 - a) * s * bessel_j1(a * s) / j0 - 1.0


def radial_rayleigh(a, lambda1, m, L, reading="gradient"):
    """Scalar Rayleigh quotient of the trial profile with transition radius a.

    reading="gradient" uses the gradient of the core profile,
      [sqrt(lambda1)(1-a)/J0(a sqrt(lambda1))]^2 int_0^a r J1(sqrt(lambda1) r)^2 dr,
    in the numerator. reading="printed" uses the amplitude with J1 in the
    denominator and J0^2 under the integral, as the expression is sometimes
    written; it is kept for comparison only.
    """
    if not 0.0 < a < 1.0:
        raise ValidationError("Transition radius must lie in (0, 1), got %r" % a)
    s = math.sqrt(lambda1)
    j0a = bessel_j0(a * s)
    if j0a == 0.0:
        raise NumericalError("Rayleigh quotient is singular at a = %r (J0 vanishes)" % a)
    core_mass, _ = quad(lambda r: r * bessel_j0(s * r) ** 2, 0.0, a, **_QUAD_OPTS)
    if reading == "gradient":
        core_energy, _ = quad(lambda r: r * bessel_j1(s * r) ** 2, 0.0, a, **_QUAD_OPTS)
        amplitude = s * (1.0 - a) / j0a
    elif reading == "printed":
        core_energy = core_mass
        amplitude = s * (1.0 - a) / bessel_j1(a * s)
    else:
        raise ValidationError("Unknown reading %r (expected 'gradient' or 'printed')" % reading)
    numerator = amplitude ** 2 * core_energy + 0.5 * (1.0 - a ** 2) + m * L / (2.0 * math.pi)
    denominator = ((1.0 - a) / j0a) ** 2 * core_mass + _cone_moment(a)
    return numerator / denominator


def _pole(lambda1):
    """Smallest a > 0 with J0(a sqrt(lambda1)) = 0."""
    return first_j0_zero() / math.sqrt(lambda1)


def _smooth_fit_root(lambda1):
    # the residual runs from -1 at a = 0 to +inf at the first zero of J0(a sqrt(lambda1))
    pole = _pole(lambda1)
    lo = min(0.01, 0.01 * pole)
    hi = min(0.99, pole * (1.0 - 1e-9))
    if smooth_fit_residual(lo, lambda1) * smooth_fit_residual(hi, lambda1) > 0:
        raise NumericalError("Smooth-fit residual has no sign change on [%r, %r] for lambda1 = %r" % (lo, hi, lambda1))
    return brentq(smooth_fit_residual, lo, hi, args=(lambda1,), xtol=1e-14, rtol=1e-14, maxiter=500)


def _theta_margin(lambda1, a):
    """Smallest value of m * theta at the rim and at its critical points in (a, 1).

    theta vanishes at a and its critical points are the roots of the cubic
    -2 lambda1 r^3 / 3 + lambda1 r^2 / 2 - c0, which changes sign at most twice on
    (a, 1). The margin is therefore negative exactly when theta dips below zero
    on the annulus, and is then its minimum. m * theta does not depend on m.
    """
    c0 = a * (1.0 + lambda1 * a ** 2 / 3.0 - lambda1 * a / 2.0)

    def m_theta(r):
        return -lambda1 * r ** 2 / 3.0 + lambda1 * r / 2.0 - 1.0 + c0 / r

    radii = [1.0] + [float(z.real) for z in np.roots([-2.0 * lambda1 / 3.0, lambda1 / 2.0, 0.0, -c0])
                     if abs(z.imag) < 1e-10 and a < z.real < 1.0]
    return min(m_theta(r) for r in radii)


def _admissibility_margin(lambda1):
    a = _smooth_fit_root(lambda1)
    return min(_theta_margin(lambda1, a), mass_from_a(a, lambda1, 1.0))


@functools.lru_cache(maxsize=None)
def admissible_threshold():
    """Smallest lambda1 whose optimal density is nonnegative and carries positive mass.

    Just above j00^2 the closed-form density dips below zero near the rim, so
    the optimum only exists from this value on. It does not depend on m.
    """
    j00_sq = first_j0_zero() ** 2
    return brentq(_admissibility_margin, j00_sq * (1.0 + 1e-9), 2.0 * j00_sq, xtol=1e-13, rtol=1e-14, maxiter=500)


def minimize_rayleigh(lambda1, m, L, reading="gradient"):
    """Minimizer of radial_rayleigh over a, from a grid scan refined by Brent's method."""
    a_max = min(0.99, 0.98 * _pole(lambda1))
    grid = np.linspace(0.01, a_max, _RAYLEIGH_GRID)
    values = [radial_rayleigh(a, lambda1, m, L, reading) for a in grid]
    k = int(np.argmin(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda a: radial_rayleigh(a, lambda1, m, L, reading),
                          bounds=(lo, hi), method="bounded", options=dict(xatol=1e-9))
    return float(res.x)


def solve_radial(lambda1, m):
    """Optimal radial density for a prescribed eigenvalue lambda1.

    Finds a_bar as the root of smooth_fit_residual, then the mass from the mass
    identity, and cross-checks a_bar against the minimizer of the scalar
    Rayleigh problem. lambda1 must exceed j00^2 and the resulting density must
    be nonnegative with positive mass (see admissible_threshold).
    """
    j00_sq = first_j0_zero() ** 2
    if not lambda1 > j00_sq:
        raise ValidationError("lambda not admissible (<= j00^2 = %.15g): %r" % (j00_sq, lambda1))
    if m <= 0:
        raise ValidationError("Stiffness m must be positive, got %r" % m)

    a_bar = _smooth_fit_root(lambda1)
    mass_L = mass_from_a(a_bar, lambda1, m)
    if _theta_margin(lambda1, a_bar) < -_THETA_TOL or mass_L <= 0.0:
        raise ValidationError("lambda not admissible (optimal density is negative near the rim or has mass %.3e; "
                              "lambda1 must be >= %.12g): %r" % (mass_L, admissible_threshold(), lambda1))

    argmin = minimize_rayleigh(lambda1, m, mass_L)
    if abs(argmin - a_bar) > 1e-3:
        logging.warning("Rayleigh minimizer %.6f disagrees with the smooth-fit radius %.6f", argmin, a_bar)
    opt = make_optimum(lambda1, m, a_bar, mass_L, rayleigh_argmin=argmin)
    logging.info("Radial optimum: lambda1=%.6f m=%.6f a_bar=%.6f L=%.6f", lambda1, m, a_bar, mass_L)
    return opt


def minimum_mass(m):
    """Mass of the optimum at the admissibility threshold; smaller masses have no radial optimum."""
    lam = admissible_threshold()
    return mass_from_a(_smooth_fit_root(lam), lam, m)


def solve_radial_for_mass(m, L):
    """Optimal radial pair for a prescribed mass L instead of a prescribed eigenvalue."""
    if L <= 0:
        raise ValidationError("Mass L must be positive, got %r" % L)
    if m <= 0:
        raise ValidationError("Stiffness m must be positive, got %r" % m)

    def excess(lam):
        return mass_from_a(_smooth_fit_root(lam), lam, m) - L

    lo = admissible_threshold()
    if excess(lo) > 0:
        raise ValidationError("Mass L = %r is below the smallest admissible mass %.6g for m = %r"
                              % (L, minimum_mass(m), m))
    hi = 2.0 * lo
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e8:
            raise NumericalError("Could not bracket the eigenvalue for m = %r, L = %r" % (m, L))
    lam = brentq(excess, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=500)
    return solve_radial(lam, m)


def interpolate_theta(mesh, opt):
    """Analytic density evaluated at the triangle centroids of a disk mesh."""
    r = np.minimum(np.hypot(mesh.centroids[:, 0], mesh.centroids[:, 1]), 1.0)
    return DensityField(mesh, np.maximum(theta_profile(r, opt), 0.0), p=1.0)


def interpolate_u(mesh, opt, normalized=True):
    """Analytic eigenfunction evaluated at the nodes of a disk mesh."""
    r = np.minimum(np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1]), 1.0)
    return np.asarray(u_profile(r, opt, normalized=normalized))
