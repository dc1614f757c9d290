import math

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose
from scipy.linalg import eigh
from scipy.special import jn_zeros

from eigen import dirichlet_eigenpair, rayleigh_quotient, smallest_eigenpair
from errors import ValidationError
from fem import DensityField, assemble_mass, assemble_stiffness
from mesh import disk_mesh, rect_mesh
from radial import interpolate_theta, interpolate_u, solve_radial

J00_SQ = jn_zeros(0, 1)[0] ** 2


def test_diagonal_pencil():
    K = sp.diags([3.0, 1.0, 2.0, 5.0])
    pair = smallest_eigenpair(K, sp.identity(4))
    assert pair.converged
    assert_allclose(pair.lambda1, 1.0, atol=1e-10)
    assert_allclose(np.abs(pair.u), [0, 1, 0, 0], atol=1e-6)


def test_identity_pencil_converges_immediately():
    pair = smallest_eigenpair(sp.identity(5), sp.identity(5))
    assert pair.iterations == 0
    assert pair.converged
    assert_allclose(pair.lambda1, 1.0)


def test_matches_dense_solver():
    # rod model: tridiagonal stiffness and consistent mass
    n = 40
    K = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) * n
    M = sp.diags([np.ones(n - 1), 4 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) / (6.0 * n)
    pair = smallest_eigenpair(K, M)
    w = eigh(K.toarray(), M.toarray(), eigvals_only=True)
    assert_allclose(pair.lambda1, w[0], rtol=1e-10)
    assert pair.residual < 1e-10


def test_normalization_and_sign(disk8):
    pair = dirichlet_eigenpair(disk8, None, 1.0)
    M = assemble_mass(disk8, eliminate=False)
    assert_allclose(pair.u @ (M @ pair.u), 1.0, rtol=1e-12)
    assert np.sum(M @ pair.u) > 0
    assert np.all(pair.u[disk8.boundary_nodes] == 0.0)
    assert np.all(pair.u >= -1e-12)


def test_iteration_limit_returns_best_pair():
    n = 30
    K = sp.diags(np.linspace(1.0, 1.01, n))
    pair = smallest_eigenpair(K, sp.identity(n), tol=1e-14, max_iter=2)
    assert not pair.converged
    assert pair.iterations == 2
    assert np.isfinite(pair.lambda1)


def test_dimension_mismatch():
    with pytest.raises(ValidationError, match="mismatch"):
        smallest_eigenpair(sp.identity(3), sp.identity(4))
    with pytest.raises(ValidationError):
        smallest_eigenpair(sp.identity(3), sp.identity(3), x0=np.zeros(3))


def test_rayleigh_quotient(disk8):
    K = assemble_stiffness(disk8, None, 1.0)
    M = assemble_mass(disk8)
    pair = dirichlet_eigenpair(disk8, None, 1.0)
    assert_allclose(rayleigh_quotient(pair.u[disk8.interior_nodes], K, M), pair.lambda1, rtol=1e-10)
    with pytest.raises(ValidationError):
        rayleigh_quotient(np.zeros(K.shape[0]), K, M)


def test_start_vector_scale_is_irrelevant(disk8):
    u0 = 1.0 - np.hypot(disk8.nodes[:, 0], disk8.nodes[:, 1])
    a = dirichlet_eigenpair(disk8, None, 1.0, u0=u0)
    b = dirichlet_eigenpair(disk8, None, 1.0, u0=7.0 * u0)
    assert_allclose(a.lambda1, b.lambda1, rtol=1e-12)
    assert_allclose(a.u, b.u, atol=1e-8)


def test_reinforcement_raises_eigenvalue(disk8):
    base = dirichlet_eigenpair(disk8, None, 5.0)
    theta = DensityField.uniform(disk8, 0.4)
    assert dirichlet_eigenpair(disk8, theta, 5.0).lambda1 > base.lambda1


def test_disk_converges_at_second_order():
    errors = [dirichlet_eigenpair(disk_mesh(n), None, 1.0).lambda1 - J00_SQ for n in (8, 16)]
    assert errors[0] > 0 and errors[1] > 0
    assert 3.2 <= errors[0] / errors[1] <= 4.8


def test_square_converges_at_second_order():
    errors = [dirichlet_eigenpair(rect_mesh(n, n), None, 1.0).lambda1 - 2 * math.pi ** 2 for n in (16, 32)]
    assert 3.2 <= errors[0] / errors[1] <= 4.8


@pytest.mark.slow
def test_unreinforced_disk(disk64):
    pair = dirichlet_eigenpair(disk64, None, 1.0)
    assert abs(pair.lambda1 - J00_SQ) < 0.01 * J00_SQ


@pytest.mark.slow
def test_unreinforced_square():
    pair = dirichlet_eigenpair(rect_mesh(64, 64), None, 1.0)
    assert abs(pair.lambda1 - 2 * math.pi ** 2) < 0.01 * 2 * math.pi ** 2


def test_rayleigh_quotient_of_random_vector_dominates(disk8):
    K = assemble_stiffness(disk8, None, 1.0)
    M = assemble_mass(disk8)
    lam = smallest_eigenpair(K, M).lambda1
    rng = np.random.RandomState(1)
    for _ in range(5):
        assert rayleigh_quotient(rng.rand(K.shape[0]), K, M) >= lam - 1e-10


def test_local_reinforcement_never_lowers_eigenvalue():
    mesh = disk_mesh(4)
    base = dirichlet_eigenpair(mesh, None, 3.0).lambda1
    for t in (0, mesh.num_triangles // 2, mesh.num_triangles - 1):
        values = np.zeros(mesh.num_triangles)
        values[t] = 1.0
        lam = dirichlet_eigenpair(mesh, DensityField(mesh, values), 3.0).lambda1
        assert lam >= base - 1e-10


@pytest.mark.slow
def test_rayleigh_quotient_of_radial_optimum(disk64):
    opt = solve_radial(10.0, 5.0)
    K = assemble_stiffness(disk64, interpolate_theta(disk64, opt), 5.0)
    M = assemble_mass(disk64)
    u = interpolate_u(disk64, opt)[disk64.interior_nodes]
    assert abs(rayleigh_quotient(u, K, M) - 10.0) < 0.2
