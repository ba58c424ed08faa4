import math

import numpy as np
import pytest

from app.core.exceptions import ArgumentError
from app.services.admissibility import poincare_constant
from app.services.mesh import (
    MeshKind,
    build_disk_polar,
    build_disk_radial,
    build_rectangle,
    dirichlet_energy,
    integrate,
    l2_norm,
)

J01 = 2.404825557695773


@pytest.mark.parametrize(
    "mesh, expected",
    [
        (build_disk_radial(2.4, 64), math.pi * 2.4 ** 2),
        (build_disk_polar(2.4, 16, 12), math.pi * 2.4 ** 2),
        (build_rectangle(1.5, 0.5, 12, 8), 0.75),
    ],
)
def test_cell_measures_sum_to_domain_area(mesh, expected):
    assert mesh.total_measure == pytest.approx(expected, rel=1e-12)
    assert integrate(mesh, np.ones(mesh.n_cells)) == pytest.approx(mesh.area, rel=1e-12)


@pytest.mark.parametrize(
    "mesh",
    [build_disk_radial(1.0, 32), build_disk_polar(1.0, 10, 8), build_rectangle(1.0, 2.0, 9, 8)],
)
def test_stiffness_is_symmetric_positive_definite(mesh):
    K = mesh.stiffness.toarray()
    np.testing.assert_array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() > 0


def test_radial_poincare_constant_matches_bessel_zero():
    mesh = build_disk_radial(2.4, 1024)
    assert poincare_constant(mesh) == pytest.approx((J01 / 2.4) ** 2, rel=1e-3)


def test_polar_grid_reproduces_radial_ground_eigenvalue():
    radial = build_disk_radial(2.4, 24)
    polar = build_disk_polar(2.4, 24, 12)
    assert poincare_constant(polar) == pytest.approx(poincare_constant(radial), rel=1e-8)


def test_unit_square_poincare_constant():
    assert poincare_constant(build_rectangle(1.0, 1.0, 32, 32)) == pytest.approx(2 * math.pi ** 2, rel=5e-3)


def test_dirichlet_energy_of_constant_is_boundary_only():
    mesh = build_rectangle(1.0, 1.0, 8, 8)
    u = np.ones(mesh.n_cells)
    # only the boundary terms 2 dy/dx (or 2 dx/dy) survive, 8 per side
    assert dirichlet_energy(mesh, u) == pytest.approx(4 * 8 * 2.0, rel=1e-12)


def test_laplacian_is_consistent_with_energy(rng):
    mesh = build_disk_radial(1.0, 40)
    u = rng.random(mesh.n_cells)
    assert integrate(mesh, u * mesh.laplacian(u)) == pytest.approx(dirichlet_energy(mesh, u), rel=1e-10)


def test_l2_norm():
    mesh = build_rectangle(2.0, 2.0, 8, 8)
    assert l2_norm(mesh, np.full(mesh.n_cells, 3.0)) == pytest.approx(6.0)


def test_polar_cell_ordering():
    mesh = build_disk_polar(1.0, 8, 6, allow_coarse=True)
    assert mesh.resolution == (8, 6)
    # cell (i, j) sits at index i * n_t + j
    np.testing.assert_array_equal(mesh.ring_index[:12], [0] * 6 + [1] * 6)
    assert mesh.cell_centers[7, 0] == pytest.approx(1.5 / 8)
    assert mesh.cell_centers[7, 1] == pytest.approx(1.5 * 2 * math.pi / 6)


def test_rectangle_cell_ordering():
    mesh = build_rectangle(2.0, 1.0, 8, 8)
    np.testing.assert_allclose(mesh.cell_centers[1], [0.125, 0.1875])
    np.testing.assert_allclose(mesh.cell_centers[8], [0.375, 0.0625])


@pytest.mark.parametrize(
    "build",
    [
        lambda: build_disk_radial(2.4, 4),
        lambda: build_disk_radial(-1.0, 16),
        lambda: build_disk_radial(float("nan"), 16),
        lambda: build_disk_polar(1.0, 8, 2, allow_coarse=True),
        lambda: build_rectangle(1.0, 0.0, 8, 8),
        lambda: build_rectangle(1.0, 1.0, 8, 7),
    ],
)
def test_invalid_mesh_arguments(build):
    with pytest.raises(ArgumentError):
        build()


def test_coarse_meshes_are_opt_in():
    mesh = build_disk_radial(1.0, 3, allow_coarse=True)
    assert mesh.n_cells == 3


def test_check_field_rejects_length_mismatch():
    mesh = build_disk_radial(1.0, 16)
    with pytest.raises(ArgumentError):
        integrate(mesh, np.ones(15))


def test_rectangle_has_no_radius():
    with pytest.raises(ArgumentError):
        build_rectangle(1.0, 1.0, 8, 8).radius



def test_describe():
    desc = build_disk_polar(2.0, 10, 8).describe()
    assert desc.kind == MeshKind.DISK_POLAR.value
    assert desc.geometry == {"radius": 2.0}
    assert desc.resolution == [10, 8]
