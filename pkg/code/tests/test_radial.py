import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from errors import ValidationError
from mesh import disk_mesh
from radial import (_cone_moment, _smooth_fit_root, _theta_margin, admissible_threshold, interpolate_theta,
                    interpolate_u, lambda_from_a, make_optimum, mass_from_a, minimize_rayleigh, minimum_mass,
                    radial_rayleigh, smooth_fit_residual, solve_radial, solve_radial_for_mass, theta_profile,
                    u_prime, u_profile)
from specfun import first_j0_zero


@pytest.fixture(scope="module")
def opt():
    return solve_radial(10.0, 5.0)


def test_golden_values(opt):
    assert abs(opt.a_bar - 0.244419) < 1e-4
    assert abs(opt.mass_L - 0.424242) < 1e-4
    assert abs(opt.r_peak - 0.751491) < 1e-4


def test_theta_at_rim(opt):
    assert abs(theta_profile(1.0, opt) - 0.132211) < 1e-4


def test_smooth_fit(opt):
    assert abs(smooth_fit_residual(opt.a_bar, opt.lambda1)) < 1e-8
    assert_allclose(u_prime(opt.a_bar, opt), -1.0, atol=1e-8)


def test_mass_identity(opt):
    mass, _ = quad(lambda r: r * theta_profile(r, opt), opt.a_bar, 1.0, epsabs=1e-13, epsrel=1e-12)
    assert abs(2 * math.pi * mass - opt.mass_L) < 1e-8


def test_theta_vanishes_on_core_and_is_nonnegative(opt):
    r = np.linspace(0.0, 1.0, 1001)
    theta = theta_profile(r, opt)
    assert np.all(theta[r <= opt.a_bar] == 0.0)
    assert np.all(theta >= -1e-12)
    assert theta_profile(opt.r_peak, opt) >= theta.max() - 1e-12


def test_annulus_ode_residual(opt):
    # -(1/r) d/dr [r (1 + m theta) u'] = lambda u on (a_bar, 1)
    h = 1e-5
    r = np.linspace(opt.a_bar + 1e-3, 1.0 - 1e-3, 200)

    def flux(s):
        return s * (1.0 + opt.m * theta_profile(s, opt)) * u_prime(s, opt)

    lhs = -(flux(r + h) - flux(r - h)) / (2 * h) / r
    assert_allclose(lhs, opt.lambda1 * u_profile(r, opt), atol=1e-6)


def test_core_bessel_residual(opt):
    h = 1e-5
    r = np.linspace(0.02, opt.a_bar - 1e-3, 200)
    lhs = -(r_flux(r + h, opt) - r_flux(r - h, opt)) / (2 * h) / r
    assert_allclose(lhs, opt.lambda1 * u_profile(r, opt), atol=1e-6)


def r_flux(s, opt):
    return s * u_prime(s, opt)


def test_gradient_bounded_by_one_on_core(opt):
    r = np.linspace(0.0, opt.a_bar, 300)
    assert np.all(np.abs(u_prime(r, opt)) <= 1.0 + 1e-9)
    r = np.linspace(opt.a_bar + 1e-9, 1.0, 300)
    assert_allclose(np.abs(u_prime(r, opt)), 1.0)


def test_outer_branch_is_cone(opt):
    r = np.linspace(opt.a_bar + 1e-6, 1.0, 50)
    assert_allclose(u_profile(r, opt), 1.0 - r, atol=1e-15)
    assert_allclose(u_profile(opt.a_bar, opt), 1.0 - opt.a_bar, atol=1e-12)


def test_normalized_profile(opt):
    norm, _ = quad(lambda r: r * u_profile(r, opt, normalized=True) ** 2, 0.0, 1.0,
                   points=[opt.a_bar], epsabs=1e-13)
    assert_allclose(2 * math.pi * norm, 1.0, atol=1e-8)


def test_rayleigh_recovers_transition_radius(opt):
    assert abs(opt.rayleigh_argmin - opt.a_bar) < 1e-3
    assert abs(minimize_rayleigh(10.0, 5.0, 0.424242) - 0.244419) < 1e-3


def test_rayleigh_value_at_minimizer(opt):
    assert abs(radial_rayleigh(opt.a_bar, opt.lambda1, opt.m, opt.mass_L) - opt.lambda1) < 1e-2


def test_cone_moment_at_zero():
    assert_allclose(_cone_moment(0.0), 1.0 / 12.0)
    value, _ = quad(lambda r: r * (1 - r) ** 2, 0.3, 1.0)
    assert_allclose(_cone_moment(0.3), value, rtol=1e-12)


def test_printed_reading_differs():
    a = 0.244419
    assert radial_rayleigh(a, 10.0, 5.0, 0.424242, reading="printed") != radial_rayleigh(a, 10.0, 5.0, 0.424242)
    with pytest.raises(ValidationError):
        radial_rayleigh(a, 10.0, 5.0, 0.424242, reading="other")


def test_mass_and_lambda_are_inverse():
    for a in (0.1, 0.3, 0.6):
        L = mass_from_a(a, 12.0, 3.0)
        assert_allclose(lambda_from_a(a, 3.0, L), 12.0, rtol=1e-13)


def test_lambda_from_a_rejects_bad_input():
    with pytest.raises(ValidationError):
        lambda_from_a(1.2, 5.0, 0.4)
    with pytest.raises(ValidationError):
        lambda_from_a(0.5, 0.0, 0.4)
    with pytest.raises(ValidationError):
        lambda_from_a(0.5, 5.0, -1.0)


def test_rejects_inadmissible_lambda():
    with pytest.raises(ValidationError, match="not admissible"):
        solve_radial(1.0, 5.0)
    with pytest.raises(ValidationError, match="not admissible"):
        solve_radial(first_j0_zero() ** 2, 5.0)


def test_mass_grows_with_lambda():
    masses = [solve_radial(lam, 5.0).mass_L for lam in (7.0, 10.0, 15.0)]
    assert 0.0 < masses[0] < masses[1] < masses[2]


def test_solve_for_mass(opt):
    inverse = solve_radial_for_mass(5.0, opt.mass_L)
    assert_allclose(inverse.lambda1, 10.0, atol=1e-6)
    assert_allclose(inverse.a_bar, opt.a_bar, atol=1e-6)


def test_interpolation_on_disk(opt):
    mesh = disk_mesh(32)
    theta = interpolate_theta(mesh, opt)
    assert_allclose(theta.total_mass, opt.mass_L, rtol=0.05)
    u = interpolate_u(mesh, opt)
    assert np.all(np.abs(u[mesh.boundary_nodes]) < 1e-12)


def test_lambda_from_a_reference_values():
    assert abs(lambda_from_a(0.244419, 5.0, 0.424242) - 10.0) < 1e-3
    assert abs(lambda_from_a(0.5, 1.0, 0.628319) - 8.64) < 1e-6
    assert abs(lambda_from_a(1e-9, 1.0, 0.0) - 6.0) < 1e-6


def test_smooth_fit_residual_away_from_root():
    assert abs(smooth_fit_residual(0.9, 10.0)) > 0.1
    for lam in (10.0, 20.0, 40.0):
        assert_allclose(smooth_fit_residual(1.0 - 1e-12, lam), -1.0, atol=1e-9)


def test_lambda_just_above_unreinforced_is_not_admissible():
    # the closed-form density dips below zero near the rim here
    j00_sq = first_j0_zero() ** 2
    for lam in (j00_sq + 1e-9, j00_sq + 0.05):
        with pytest.raises(ValidationError, match="not admissible"):
            solve_radial(lam, 1.0)


def test_admissible_threshold():
    j00_sq = first_j0_zero() ** 2
    lam = admissible_threshold()
    assert j00_sq < lam < 6.5
    opt = solve_radial(lam * (1.0 + 1e-6), 1.0)
    assert opt.mass_L > 0.0
    assert _theta_margin(opt.lambda1, opt.a_bar) > -1e-9
    assert admissible_threshold() == lam


@pytest.mark.parametrize("m", [1.0, 5.0])
def test_density_nonnegative_across_lambda(m):
    r = np.linspace(0.0, 1.0, 2001)
    for lam in np.linspace(admissible_threshold() * (1.0 + 1e-6), 30.0, 25):
        opt = solve_radial(lam, m)
        assert opt.mass_L > 0.0
        assert np.all(theta_profile(r, opt) >= -1e-9)


def test_theta_margin_matches_sampling(opt):
    r = np.linspace(opt.a_bar, 1.0, 20001)
    assert np.min(theta_profile(r, opt)) >= 0.0
    assert _theta_margin(opt.lambda1, opt.a_bar) > 0.0
    lam = first_j0_zero() ** 2 + 0.05
    a = _smooth_fit_root(lam)
    low = make_optimum(lam, 1.0, a, mass_from_a(a, lam, 1.0))
    sampled = np.min(theta_profile(np.linspace(a, 1.0, 20001), low))
    assert sampled < 0.0
    assert_allclose(_theta_margin(lam, a), sampled, atol=1e-6)


def test_mass_below_admissible_range():
    smallest = minimum_mass(5.0)
    assert smallest > 0.0
    with pytest.raises(ValidationError, match="smallest admissible mass"):
        solve_radial_for_mass(5.0, 0.5 * smallest)
    opt = solve_radial_for_mass(5.0, 2.0 * smallest)
    assert np.all(theta_profile(np.linspace(0.0, 1.0, 501), opt) >= -1e-9)
