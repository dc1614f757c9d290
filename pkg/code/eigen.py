"""Smallest eigenpair of the generalized symmetric problem K u = lambda M u by
inverse power iteration.

K is factorized once per call with a sparse LU (scipy SuperLU); each iteration
is one forward/backward solve. The start vector is all-ones unless a warm start
is given, so iteration counts are reproducible.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from errors import NumericalError, ValidationError
from fem import assemble_mass, assemble_stiffness, extend_interior

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
_STAGNATION_WINDOW = 25


@dataclass
class EigenPair:
    """First eigenpair.

    Fields:
      lambda1: eigenvalue
      u: eigenvector, M-normalized (u^T M u = 1) with positive M-weighted mean
      residual: ||K u - lambda M u|| / ||M u||
      iterations: number of linear solves performed
      converged: False if the residual did not reach the tolerance
    """
    lambda1: float
    u: np.ndarray
    residual: float
    iterations: int
    converged: bool


def _check_pencil(K, M):
    if K.shape[0] != K.shape[1] or M.shape[0] != M.shape[1]:
        raise ValidationError("Matrices must be square, got %s and %s" % (K.shape, M.shape))
    if K.shape != M.shape:
        raise ValidationError("Dimension mismatch: K is %s but M is %s" % (K.shape, M.shape))
    if K.shape[0] == 0:
        raise ValidationError("Empty eigenproblem (no interior nodes)")


def rayleigh_quotient(u, K, M):
    """(u^T K u) / (u^T M u)"""
    u = np.asarray(u, dtype=float)
    denom = float(u @ (M @ u))
    if not np.any(u) or denom <= 0.0:
        raise ValidationError("Rayleigh quotient of a zero vector")
    return float(u @ (K @ u)) / denom


def smallest_eigenpair(K, M, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, x0=None):
    """Inverse power iteration for the smallest eigenvalue of K u = lambda M u.

    Inputs:
      K: sparse SPD matrix
      M: sparse SPD matrix of the same size
      tol: stop when ||K u - lambda M u|| / ||M u|| < tol
      max_iter: maximum number of linear solves
      x0: optional start vector (defaults to all-ones)

    Returns:
      EigenPair. If the tolerance is not met the pair with the smallest residual
      seen is returned with converged=False.
    """
    _check_pencil(K, M)
    K = sp.csc_matrix(K)
    M = sp.csr_matrix(M)
    try:
        lu = splu(K)
    except RuntimeError as e:
        raise NumericalError("Stiffness matrix factorization failed: %s" % e)

    x = np.ones(K.shape[0]) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (K.shape[0],):
        raise ValidationError("Start vector has shape %s, expected (%i,)" % (x.shape, K.shape[0]))
    if not np.any(x):
        raise ValidationError("Start vector must be nonzero")

    best = None
    stagnant = 0
    iterations = 0
    while True:
        Mx = M @ x
        norm = np.sqrt(float(x @ Mx))
        x = x / norm
        Mx = Mx / norm
        lam = float(x @ (K @ x))
        residual = float(np.linalg.norm(K @ x - lam * Mx) / np.linalg.norm(Mx))
        if not np.isfinite(residual):
            raise NumericalError("Inverse iteration produced a non-finite residual")

        if best is None or residual < best[2]:
            best = (lam, x, residual)
            stagnant = 0
        else:
            stagnant += 1

        if residual < tol:
            break
        if iterations >= max_iter or stagnant >= _STAGNATION_WINDOW:
            logging.warning("Inverse iteration stopped after %i solves with residual %.3e (tol %.1e)",
                            iterations, best[2], tol)
            break
        x = lu.solve(Mx)
        iterations += 1

    lam, x, residual = best
    if np.sum(M @ x) < 0:
        x = -x
    return EigenPair(lam, x, residual, iterations, residual < tol)


def dirichlet_eigenpair(mesh, theta, m, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, u0=None):
    """First Dirichlet eigenpair of -div((1 + m theta) grad u) = lambda u on a mesh.

    u0 is an optional nodal warm start; the returned u is nodal and vanishes on
    the boundary.
    """
    K = assemble_stiffness(mesh, theta, m)
    M = assemble_mass(mesh)
    x0 = None if u0 is None else np.asarray(u0, dtype=float)[mesh.interior_nodes]
    if x0 is not None and not np.any(x0):
        x0 = None
    pair = smallest_eigenpair(K, M, tol, max_iter, x0)
    pair.u = extend_interior(mesh, pair.u)
    return pair
