"""This file contains the P1 finite element kernels: the weighted stiffness
form int (1 + m theta) grad u . grad v, the mass form int u v, element gradients
and the L^p mass of a piecewise constant density.

Dirichlet conditions are imposed by elimination: the matrices handed to the
eigensolver are the interior-node blocks.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from errors import ValidationError

_LOCAL_MASS = np.array([[2.0, 1.0, 1.0],
                        [1.0, 2.0, 1.0],
                        [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True, eq=False)
class DensityField:
    """Piecewise constant reinforcement density, one value per triangle.

    p is the exponent of the admissible class the field was built for
    (1 for the mass constraint int theta <= L).
    """
    mesh: object
    values: np.ndarray
    p: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.num_triangles,):
            raise ValidationError("Density has %s values but the mesh has %i triangles"
                                  % (values.shape, self.mesh.num_triangles))
        if not np.all(np.isfinite(values)):
            raise ValidationError("Density values must be finite")
        if np.any(values < 0.0):
            raise ValidationError("Density values must be nonnegative, min is %r" % values.min())
        if self.p < 1.0:
            raise ValidationError("Density exponent p must be >= 1, got %r" % self.p)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, mesh, p=1.0):
        return cls(mesh, np.zeros(mesh.num_triangles), p)

    @classmethod
    def uniform(cls, mesh, L, p=1.0):
        """Constant density with L^p mass exactly L."""
        return cls(mesh, np.full(mesh.num_triangles, L * mesh.area ** (-1.0 / p)), p)

    @property
    def total_mass(self):
        """int theta dx"""
        return float(np.dot(self.mesh.areas, self.values))


def shape_gradients(mesh):
    """Gradients of the three barycentric basis functions on every triangle.

    Returns an array shape (F, 3, 2).
    """
    p = mesh.nodes[mesh.triangles]
    area2 = 2.0 * mesh.areas
    if np.any(area2 <= 0.0):
        raise ValidationError("Mesh has a degenerate triangle")
    grads = np.empty((mesh.num_triangles, 3, 2))
    for k in range(3):
        a = p[:, (k + 1) % 3]
        b = p[:, (k + 2) % 3]
        # rotate the opposite edge by -90 degrees and scale
        grads[:, k, 0] = (a[:, 1] - b[:, 1]) / area2
        grads[:, k, 1] = (b[:, 0] - a[:, 0]) / area2
    return grads


def _assemble(mesh, local):
    """Sums local (F, 3, 3) blocks into a CSR matrix; duplicate entries are summed in a fixed order."""
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.num_nodes
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def interior_block(A, mesh):
    """Restriction of a nodal matrix to the interior nodes (Dirichlet elimination)."""
    idx = mesh.interior_nodes
    return A[idx][:, idx].tocsr()


def extend_interior(mesh, u_interior):
    """Nodal vector equal to u_interior on interior nodes and 0 on the boundary."""
    u = np.zeros(mesh.num_nodes)
    u[mesh.interior_nodes] = u_interior
    return u


def assemble_stiffness(mesh, theta, m, eliminate=True):
    """Weighted stiffness matrix with coefficient (1 + m theta_T) on triangle T.

    Inputs:
      mesh: Mesh
      theta: DensityField on the same mesh, or None for theta = 0
      m: stiffness coefficient, >= 0
      eliminate: if True return the interior block, otherwise the full matrix

    Returns:
      scipy.sparse CSR matrix
    """
    if m < 0:
        raise ValidationError("Stiffness m must be nonnegative, got %r" % m)
    if theta is None:
        coeff = np.ones(mesh.num_triangles)
    else:
        if theta.mesh is not mesh:
            raise ValidationError("Density field is defined on a different mesh")
        coeff = 1.0 + m * theta.values
    G = shape_gradients(mesh)
    local = np.einsum("tia,tja->tij", G, G) * (coeff * mesh.areas)[:, None, None]
    K = _assemble(mesh, local)
    return interior_block(K, mesh) if eliminate else K


def assemble_mass(mesh, eliminate=True):
    """Consistent P1 mass matrix; local block (area / 12) [[2,1,1],[1,2,1],[1,1,2]]."""
    local = mesh.areas[:, None, None] * _LOCAL_MASS[None, :, :]
    M = _assemble(mesh, local)
    return interior_block(M, mesh) if eliminate else M


def element_gradients(mesh, u):
    """Constant gradient of the P1 interpolant of the nodal vector u, shape (F, 2)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.num_nodes,):
        raise ValidationError("Nodal vector has shape %s, expected (%i,)" % (u.shape, mesh.num_nodes))
    G = shape_gradients(mesh)
    return np.einsum("tia,ti->ta", G, u[mesh.triangles])


def gradient_norms(mesh, u):
    """|grad u| on every triangle."""
    return np.linalg.norm(element_gradients(mesh, u), axis=1)


def lp_mass(theta, p=None):
    """(sum_T area_T theta_T^p)^(1/p); p defaults to the field's own exponent."""
    p = theta.p if p is None else p
    if p < 1.0:
        raise ValidationError("Exponent p must be >= 1, got %r" % p)
    values = theta.values
    top = values.max() if len(values) else 0.0
    if top == 0.0:
        return 0.0
    # scale by the maximum so large exponents do not overflow
    return float(top * np.dot(theta.mesh.areas, (values / top) ** p) ** (1.0 / p))


def save_matrix(A, path):
    """Coordinate-format text, one 'i j value' entry per line."""
    C = sp.coo_matrix(A)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        for i, j, v in zip(C.row[order], C.col[order], C.data[order]):
            fh.write("%i %i %r\n" % (i, j, float(v)))
    logging.info("Wrote %i matrix entries to %s", C.nnz, path)
