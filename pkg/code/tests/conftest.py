import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from mesh import disk_mesh, rect_mesh  # noqa: E402


@pytest.fixture(scope="session")
def disk8():
    return disk_mesh(8)


@pytest.fixture(scope="session")
def disk16():
    return disk_mesh(16)


@pytest.fixture(scope="session")
def disk64():
    return disk_mesh(64)


@pytest.fixture(scope="session")
def square8():
    return rect_mesh(8, 8)
