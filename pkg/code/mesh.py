"""This file contains the triangle meshes: generation for the unit disk and for
rectangles, validation, and a plain-text file format.

File format (zero-based indices):
  V F
  x y b        (V lines, b = 1 for boundary nodes, 0 otherwise)
  i j k        (F lines, counterclockwise)
"""

import logging
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from errors import MeshFormatError, ValidationError

MIN_ANGLE_DEGREES = 20.0
_NODES_PER_RING = 8


@dataclass(frozen=True, eq=False)
class Mesh:
    """A 2D triangle mesh.

    Fields:
      nodes: float array shape (V, 2)
      triangles: int array shape (F, 3), counterclockwise
      boundary_nodes: sorted int array of the nodes on the boundary
      h: longest edge length
    """
    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    h: float

    @cached_property
    def areas(self):
        """Signed areas, shape (F,)"""
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def centroids(self):
        return self.nodes[self.triangles].mean(axis=1)

    @cached_property
    def interior_nodes(self):
        mask = np.ones(len(self.nodes), dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def num_triangles(self):
        return len(self.triangles)

    @property
    def area(self):
        return float(np.sum(self.areas))

    def edges(self):
        """Unique edges as sorted node pairs, and how many triangles share each."""
        return _edges_with_counts(self.triangles)

    def boundary_edges(self):
        edges, counts = self.edges()
        return edges[counts == 1]

    def min_angle(self):
        """Smallest interior angle over all triangles, in degrees."""
        p = self.nodes[self.triangles]
        smallest = np.full(len(p), np.pi)
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            smallest = np.minimum(smallest, np.arccos(np.clip(cos, -1.0, 1.0)))
        return float(np.degrees(smallest.min()))


def _edges_with_counts(triangles):
    pairs = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    pairs = np.sort(pairs, axis=1)
    return np.unique(pairs, axis=0, return_counts=True)


def build_mesh(nodes, triangles, boundary_nodes=None):
    """Validates the connectivity and returns an immutable Mesh.

    If boundary_nodes is None it is derived from the boundary edges; otherwise it
    must agree with them.
    """
    nodes = np.array(nodes, dtype=float)
    triangles = np.array(triangles, dtype=np.int64)
    if nodes.ndim != 2 or nodes.shape[1] != 2 or len(nodes) == 0:
        raise ValidationError("Mesh needs a nonempty (V, 2) node array, got shape %s" % (nodes.shape,))
    if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
        raise ValidationError("Mesh needs a nonempty (F, 3) triangle array, got shape %s" % (triangles.shape,))
    if not np.all(np.isfinite(nodes)):
        raise ValidationError("Mesh node coordinates must be finite")
    if triangles.min() < 0 or triangles.max() >= len(nodes):
        raise ValidationError("Triangle refers to a node index outside [0, %i)" % len(nodes))

    edges, counts = _edges_with_counts(triangles)
    if np.any(counts > 2):
        raise ValidationError("Edge %s is shared by more than two triangles" % (edges[np.argmax(counts > 2)],))
    derived = np.unique(edges[counts == 1])
    if boundary_nodes is None:
        boundary_nodes = derived
    else:
        boundary_nodes = np.unique(np.asarray(boundary_nodes, dtype=np.int64))
        if not np.array_equal(boundary_nodes, derived):
            raise ValidationError("Boundary flags do not match the endpoints of the boundary edges")

    lengths = np.linalg.norm(nodes[edges[:, 0]] - nodes[edges[:, 1]], axis=1)
    for arr in (nodes, triangles, boundary_nodes):
        arr.setflags(write=False)
    mesh = Mesh(nodes, triangles, boundary_nodes, float(lengths.max()))

    bad = np.flatnonzero(mesh.areas <= 0.0)
    if len(bad):
        raise ValidationError("Triangle %i has nonpositive area %r" % (bad[0], mesh.areas[bad[0]]))
    return mesh


def _stitch_rings(inner, outer):
    """Triangulates the band between two closed rings of equally spaced nodes by
    merging them in angle order.

    Angles are compared as exact fractions of the full turn (i / ni against
    j / no), so the result has the same rotational symmetry as the rings.
    """
    triangles = []
    ni, no = len(inner), len(outer)
    i = j = 0
    while i < ni or j < no:
        if j < no and (i == ni or (j + 1) * ni <= (i + 1) * no):
            triangles.append((inner[i % ni], outer[j], outer[(j + 1) % no]))
            j += 1
        else:
            triangles.append((inner[i], outer[j % no], inner[(i + 1) % ni]))
            i += 1
    return triangles


def disk_mesh(refinement):
    """Unit disk meshed by concentric rings.

    Ring k (k = 1..refinement) has radius k / refinement and 8k equally spaced
    nodes; consecutive rings are stitched in angle order. The result is
    deterministic and symmetric under rotation by 45 degrees.
    """
    if int(refinement) != refinement or refinement < 1:
        raise ValidationError("Disk refinement must be a positive integer, got %r" % refinement)
    n = int(refinement)

    nodes = [(0.0, 0.0)]
    rings = [np.array([0])]
    for k in range(1, n + 1):
        count = _NODES_PER_RING * k
        phi = 2.0 * np.pi * np.arange(count) / count
        radius = k / n
        start = len(nodes)
        if k == n:
            # exactly on the unit circle
            nodes.extend(zip(np.cos(phi), np.sin(phi)))
        else:
            nodes.extend(zip(radius * np.cos(phi), radius * np.sin(phi)))
        rings.append(np.arange(start, start + count))

    triangles = []
    first = rings[1]
    for j in range(len(first)):
        triangles.append((0, first[j], first[(j + 1) % len(first)]))
    for k in range(2, n + 1):
        triangles.extend(_stitch_rings(rings[k - 1], rings[k]))

    return build_mesh(nodes, triangles)


def rect_mesh(nx, ny, width=1.0, height=1.0):
    """Structured mesh of [0, width] x [0, height].

    Each of the nx * ny cells is split along its diagonal from the lower-left to
    the upper-right corner, giving 2 * nx * ny triangles.
    """
    if nx < 1 or ny < 1 or int(nx) != nx or int(ny) != ny:
        raise ValidationError("Rectangle subdivisions must be positive integers, got %r x %r" % (nx, ny))
    if not (width > 0 and height > 0):
        raise ValidationError("Rectangle sides must be positive, got %r x %r" % (width, height))
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    p00 = (j * (nx + 1) + i).ravel()
    p10 = p00 + 1
    p01 = p00 + nx + 1
    p11 = p01 + 1
    lower = np.column_stack([p00, p10, p11])
    upper = np.column_stack([p00, p11, p01])
    triangles = np.empty((2 * len(p00), 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper
    return build_mesh(nodes, triangles)


def domain_mesh(domain, refinement, width=1.0, height=1.0):
    """Resolves a domain name: 'disk', 'rect' or 'file:PATH'."""
    if domain == "disk":
        return disk_mesh(refinement)
    if domain == "rect":
        nx = max(1, int(round(refinement * width)))
        ny = max(1, int(round(refinement * height)))
        return rect_mesh(nx, ny, width, height)
    if domain.startswith("file:"):
        return load_mesh(domain[len("file:"):])
    raise ValidationError("Unknown domain %r (expected disk, rect or file:PATH)" % domain)


def save_mesh(mesh, path):
    """Writes the mesh in the plain-text format described at the top of this file."""
    flags = np.zeros(mesh.num_nodes, dtype=int)
    flags[mesh.boundary_nodes] = 1
    with open(path, "w") as fh:
        fh.write("%i %i\n" % (mesh.num_nodes, mesh.num_triangles))
        for (x, y), b in zip(mesh.nodes, flags):
            fh.write("%r %r %i\n" % (float(x), float(y), b))
        for i, j, k in mesh.triangles:
            fh.write("%i %i %i\n" % (i, j, k))
    logging.info("Wrote mesh with %i nodes and %i triangles to %s", mesh.num_nodes, mesh.num_triangles, path)


def _parse_fields(path, lineno, line, count, kinds):
    fields = line.split()
    if len(fields) != count:
        raise MeshFormatError(path, lineno, "expected %i fields, found %i" % (count, len(fields)))
    try:
        return [kind(f) for kind, f in zip(kinds, fields)]
    except ValueError:
        raise MeshFormatError(path, lineno, "could not parse %r" % line.strip())


def load_mesh(path):
    """Reads a mesh file; reports the offending line of a malformed file."""
    if not os.path.exists(path):
        raise ValidationError("Mesh file %s does not exist" % path)
    with open(path, "r") as fh:
        lines = [(n, line) for n, line in enumerate(fh, start=1) if line.strip()]
    if not lines:
        raise MeshFormatError(path, 1, "empty file")

    lineno, header = lines[0]
    num_nodes, num_tris = _parse_fields(path, lineno, header, 2, (int, int))
    if num_nodes <= 0:
        raise MeshFormatError(path, lineno, "empty node list")
    if num_tris <= 0:
        raise MeshFormatError(path, lineno, "empty triangle list")
    if len(lines) != 1 + num_nodes + num_tris:
        last = lines[-1][0]
        raise MeshFormatError(path, last, "expected %i node and %i triangle lines, found %i lines"
                              % (num_nodes, num_tris, len(lines) - 1))

    nodes = np.empty((num_nodes, 2))
    boundary = []
    for idx, (lineno, line) in enumerate(lines[1:1 + num_nodes]):
        x, y, b = _parse_fields(path, lineno, line, 3, (float, float, int))
        if b not in (0, 1):
            raise MeshFormatError(path, lineno, "boundary flag must be 0 or 1, got %i" % b)
        nodes[idx] = (x, y)
        if b:
            boundary.append(idx)

    triangles = np.empty((num_tris, 3), dtype=np.int64)
    for idx, (lineno, line) in enumerate(lines[1 + num_nodes:]):
        tri = _parse_fields(path, lineno, line, 3, (int, int, int))
        if min(tri) < 0 or max(tri) >= num_nodes:
            raise MeshFormatError(path, lineno, "node index out of range [0, %i)" % num_nodes)
        p = nodes[tri]
        signed = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0])
        if signed <= 0.0:
            raise MeshFormatError(path, lineno, "triangle has nonpositive area")
        triangles[idx] = tri

    try:
        return build_mesh(nodes, triangles, boundary)
    except MeshFormatError:
        raise
    except ValidationError as e:
        raise MeshFormatError(path, lines[0][0], str(e))
