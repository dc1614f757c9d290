import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import MeshFormatError, ValidationError
from export import (read_triangle_field, write_json, write_node_field, write_profile_csv,
                    write_triangle_field)
from fem import DensityField
from radial import solve_radial


def test_profile_csv(tmp_path):
    opt = solve_radial(10.0, 5.0)
    path = tmp_path / "profile.csv"
    write_profile_csv(str(path), opt, samples=17)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,theta,u,u_prime"
    assert len(lines) == 18
    first = [float(v) for v in lines[1].split(",")]
    last = [float(v) for v in lines[-1].split(",")]
    assert first[0] == 0.0 and first[1] == 0.0
    assert last[0] == 1.0 and last[2] == 0.0 and last[3] == -1.0
    assert "e" in lines[1].split(",")[2]
    with pytest.raises(ValidationError):
        write_profile_csv(str(path), opt, samples=1)


def test_node_field(tmp_path, disk8):
    path = tmp_path / "u.csv"
    write_node_field(str(path), disk8, np.arange(disk8.num_nodes, dtype=float), name="u")
    lines = path.read_text().splitlines()
    assert lines[0] == "node,x,y,u"
    assert len(lines) == disk8.num_nodes + 1
    with pytest.raises(ValidationError):
        write_node_field(str(path), disk8, np.zeros(2))


def test_triangle_field_read_back(tmp_path, disk8):
    values = np.linspace(0.0, 2.0, disk8.num_triangles)
    path = str(tmp_path / "theta.csv")
    write_triangle_field(path, DensityField(disk8, values))
    theta = read_triangle_field(path, disk8)
    assert_allclose(theta.values, values, rtol=1e-14)


def _field(tmp_path, rows):
    path = tmp_path / "theta.csv"
    path.write_text("tri,x,y,value\n" + "".join(r + "\n" for r in rows))
    return str(path)


def test_triangle_field_diagnostics(tmp_path, square8):
    n = square8.num_triangles
    good = ["%i,0,0,1.0" % i for i in range(n)]

    bad = list(good)
    bad[1] = "1,0,0,abc"
    with pytest.raises(MeshFormatError) as info:
        read_triangle_field(_field(tmp_path, bad), square8)
    assert info.value.line == 3

    bad = list(good)
    bad[4] = "4,0,0,-1"
    with pytest.raises(MeshFormatError, match="nonnegative") as info:
        read_triangle_field(_field(tmp_path, bad), square8)
    assert info.value.line == 6

    with pytest.raises(MeshFormatError, match="no value"):
        read_triangle_field(_field(tmp_path, good[:-1]), square8)
    with pytest.raises(MeshFormatError, match="twice"):
        read_triangle_field(_field(tmp_path, good + ["0,0,0,1"]), square8)
    with pytest.raises(MeshFormatError, match="out of range"):
        read_triangle_field(_field(tmp_path, good + ["%i,0,0,1" % n]), square8)
    with pytest.raises(ValidationError):
        read_triangle_field(str(tmp_path / "missing.csv"), square8)


def test_json_is_strict_and_sorted(tmp_path):
    path = tmp_path / "r.json"
    write_json(str(path), {"b": np.float64(1.5), "a": [np.int64(2), float("nan")], "c": np.bool_(True)})
    text = path.read_text()
    assert json.loads(text) == {"a": [2, None], "b": 1.5, "c": True}
    assert text.index('"a"') < text.index('"b"')
