"""This file contains the CSV and JSON writers for results, and the reader for
density CSV files passed back in on the command line.

All floats are written with 15 significant digits after the point in
exponent form so that two runs with the same config produce identical files.
"""

import json
import logging
import math
import os

import numpy as np

from errors import MeshFormatError, ValidationError
from fem import DensityField
from radial import theta_profile, u_prime, u_profile

DEFAULT_SAMPLES = 512
_FLOAT = "%.15e"


def _row(*values):
    return ",".join(v if isinstance(v, str) else (_FLOAT % v if isinstance(v, float) else str(v))
                    for v in values) + "\n"


def write_profile_csv(path, opt, samples=DEFAULT_SAMPLES):
    """Samples theta, u, u' of a RadialOptimum on `samples` equispaced radii in [0, 1]."""
    if int(samples) != samples or samples < 2:
        raise ValidationError("Number of samples must be an integer >= 2, got %r" % samples)
    r = np.linspace(0.0, 1.0, int(samples))
    theta = theta_profile(r, opt)
    u = u_profile(r, opt)
    du = u_prime(r, opt)
    with open(path, "w") as fh:
        fh.write("r,theta,u,u_prime\n")
        for row in zip(r, theta, u, du):
            fh.write(_row(*[float(v) for v in row]))
    logging.info("Wrote %i profile samples to %s", len(r), path)


def write_node_field(path, mesh, values, name="value"):
    """One row per node: node,x,y,<name>"""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.num_nodes,):
        raise ValidationError("Nodal field has shape %s, expected (%i,)" % (values.shape, mesh.num_nodes))
    with open(path, "w") as fh:
        fh.write("node,x,y,%s\n" % name)
        for i, ((x, y), v) in enumerate(zip(mesh.nodes, values)):
            fh.write(_row(i, float(x), float(y), float(v)))
    logging.info("Wrote nodal field %s to %s", name, path)


def write_triangle_field(path, theta):
    """One row per triangle: tri,x,y,value with (x, y) the centroid."""
    mesh = theta.mesh
    with open(path, "w") as fh:
        fh.write("tri,x,y,value\n")
        for i, ((x, y), v) in enumerate(zip(mesh.centroids, theta.values)):
            fh.write(_row(i, float(x), float(y), float(v)))
    logging.info("Wrote density field to %s", path)


def read_triangle_field(path, mesh, p=1.0):
    """Reads a tri,x,y,value CSV back into a DensityField on `mesh`.

    Rows may come in any order but every triangle must appear exactly once.
    Coordinates are informational and not checked.
    """
    if not os.path.exists(path):
        raise ValidationError("Density file %s does not exist" % path)
    values = np.full(mesh.num_triangles, np.nan)
    with open(path, "r") as fh:
        header = fh.readline()
        if header.strip().replace(" ", "") != "tri,x,y,value":
            raise MeshFormatError(path, 1, "expected header 'tri,x,y,value', found %r" % header.strip())
        lineno = 1
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise MeshFormatError(path, lineno, "expected 4 fields, found %i" % len(fields))
            try:
                tri = int(fields[0])
                value = float(fields[3])
            except ValueError:
                raise MeshFormatError(path, lineno, "could not parse %r" % line.strip())
            if not 0 <= tri < mesh.num_triangles:
                raise MeshFormatError(path, lineno, "triangle index %i out of range [0, %i)" % (tri, mesh.num_triangles))
            if not np.isnan(values[tri]):
                raise MeshFormatError(path, lineno, "triangle %i listed twice" % tri)
            if not math.isfinite(value) or value < 0:
                raise MeshFormatError(path, lineno, "density must be finite and nonnegative, got %r" % value)
            values[tri] = value
    missing = np.flatnonzero(np.isnan(values))
    if len(missing):
        raise MeshFormatError(path, lineno, "%i triangles have no value (first is %i)" % (len(missing), missing[0]))
    return DensityField(mesh, values, p)


def _plain(obj):
    """Converts numpy scalars and non-finite floats so that json.dump writes strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def write_json(path, obj):
    """Deterministic JSON: sorted keys, fixed indentation, NaN written as null."""
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")
    logging.info("Wrote %s", path)
