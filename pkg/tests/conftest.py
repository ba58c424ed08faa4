"""
Shared fixtures: meshes, solver options and the disk quantum dot fields
"""

import json

import numpy as np
import pytest

from app.core.config import Settings, get_settings
from app.services.field import distribution_of, make_annular_characteristic
from app.services.mesh import build_disk_polar, build_disk_radial, build_rectangle
from app.services.nlep import SolverOptions
from app.services.problem import DOT_P_HEIGHT, DOT_Q_HEIGHT, DOT_R1, DOT_R2, DOT_RADIUS


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    """Isolate every test from QDOT_* variables in the developer's shell"""
    import os

    for key in list(os.environ):
        if key.upper().startswith("QDOT_"):
            monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def settings() -> Settings:
    return Settings(_env_file=None)


@pytest.fixture
def opts() -> SolverOptions:
    return SolverOptions()


@pytest.fixture
def radial_disk():
    # h = 0.005 nm puts both annulus radii on ring faces
    return build_disk_radial(DOT_RADIUS, 480)


@pytest.fixture
def polar_disk():
    return build_disk_polar(DOT_RADIUS, 24, 12)


@pytest.fixture
def unit_cells():
    """Six unit-measure cells: 2 x 3 rectangle"""
    return build_rectangle(2.0, 3.0, 2, 3, allow_coarse=True)


@pytest.fixture
def square():
    return build_rectangle(1.0, 1.0, 16, 16)


@pytest.fixture
def dot_fields(radial_disk):
    """Optimal placements of the disk example: q on (r1, R], p on (r2, R]"""
    q = make_annular_characteristic(radial_disk, DOT_Q_HEIGHT, DOT_R1, DOT_RADIUS)
    p = make_annular_characteristic(radial_disk, DOT_P_HEIGHT, DOT_R2, DOT_RADIUS)
    return p, q


@pytest.fixture
def dot_classes(radial_disk, dot_fields):
    p, q = dot_fields
    return distribution_of(radial_disk, p), distribution_of(radial_disk, q)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_problem_config():
    """Coarse radial disk config usable by the CLI and the HTTP API"""
    return {
        "mesh": {"kind": "disk_radial", "radius": {"value": 2.4, "unit": "nm"}, "n": 96},
        "gamma": {"value": 0.4441, "unit": "eV*nm^2"},
        "p": {
            "kind": "annulus",
            "height": {"value": 0.27, "unit": "eV"},
            "inner_radius": {"value": 2.25, "unit": "nm"},
            "outer_radius": {"value": 2.4, "unit": "nm"},
        },
        "q": {
            "kind": "annulus",
            "height": {"value": 2.13, "unit": "eV^2"},
            "inner_radius": {"value": 2.125, "unit": "nm"},
            "outer_radius": {"value": 2.4, "unit": "nm"},
        },
    }


@pytest.fixture
def config_file(tmp_path, small_problem_config):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(small_problem_config), encoding="utf-8")
    return path



@pytest.fixture
def eight_cells():
    """Eight unit-measure cells: 2 x 4 rectangle"""
    return build_rectangle(2.0, 4.0, 2, 4, allow_coarse=True)
