import math

import numpy as np
import pytest

from app.core.config import Settings
from app.core.exceptions import ArgumentError, ConditionsViolatedError
from app.services.admissibility import poincare_constant
from app.services.field import make_annular_characteristic
from app.services.mesh import build_disk_polar, build_disk_radial, build_rectangle, integrate, l2_norm
from app.services.nlep import (
    SolverOptions,
    frozen_eigenpair,
    hellmann_feynman_slope,
    level_set_fraction,
    linear_ground_state,
    rayleigh_functional,
    residual,
    solve_nonlinear,
)
from app.services.problem import DOT_BAND, DOT_LAMBDA_SQUARED
from tests.oracles import companion_ground_state

GAMMA = 0.4441
J01 = 2.404825557695773


def test_zero_potential_gives_gamma_times_poincare_constant(radial_disk, opts):
    zeros = np.zeros(radial_disk.n_cells)
    gs = solve_nonlinear(radial_disk, zeros, zeros, opts)
    assert gs.lambda_squared == pytest.approx(GAMMA * poincare_constant(radial_disk), rel=1e-8)
    assert gs.lambda_squared == pytest.approx(GAMMA * (J01 / 2.4) ** 2, rel=1e-3)
    assert gs.lambda_squared == pytest.approx(0.4459, abs=5e-4)
    # √‖q‖ = 0, so the root cannot lie in the admissible interval
    assert not gs.in_interval


def test_strict_interval_reports_violated_conditions(radial_disk):
    zeros = np.zeros(radial_disk.n_cells)
    with pytest.raises(ConditionsViolatedError):
        solve_nonlinear(radial_disk, zeros, zeros, SolverOptions(strict_interval=True))


@pytest.mark.parametrize("c, d", [(0.1, 0.0), (0.0, 1.0), (0.25, 2.0)])
def test_constant_potentials_shift_the_spectrum(c, d, opts):
    mesh = build_disk_radial(2.4, 128)
    gs = solve_nonlinear(mesh, np.full(mesh.n_cells, c), np.full(mesh.n_cells, d), opts)
    mu0 = GAMMA * poincare_constant(mesh)
    assert gs.lam == pytest.approx(c + math.sqrt(c * c + mu0 + d), rel=1e-8)


COMPANION_MESHES = [
    build_rectangle(1.0, 1.5, 10, 12),
    build_disk_polar(1.0, 12, 8),
    build_disk_radial(1.0, 40),
]


@pytest.mark.parametrize("seed", range(30))
def test_matches_companion_linearization(seed):
    rng = np.random.default_rng(seed)
    mesh = COMPANION_MESHES[seed % len(COMPANION_MESHES)]
    gamma = rng.uniform(0.2, 1.0)
    p = rng.uniform(0.0, 0.4) * rng.random(mesh.n_cells)
    q = rng.uniform(0.5, 5.0) * rng.random(mesh.n_cells)
    gs = solve_nonlinear(mesh, p, q, SolverOptions(gamma=gamma, root_tol=1e-12))
    assert gs.lam == pytest.approx(companion_ground_state(mesh, p, q, gamma), rel=1e-8)
    assert gs.diagnostics["slope_at_root"] < 0


def test_ground_state_is_normalized_and_positive(radial_disk, dot_fields, opts):
    p, q = dot_fields
    gs = solve_nonlinear(radial_disk, p, q, opts)
    assert l2_norm(radial_disk, gs.u) == pytest.approx(1.0, abs=1e-12)
    assert gs.u.min() > -1e-12
    assert gs.diagnostics["min_u"] == gs.u.min()
    assert gs.residual <= 1e-5
    assert gs.residual == pytest.approx(residual(radial_disk, p, q, gs, GAMMA))
    assert gs.iterations["inner"] >= gs.iterations["outer"]


def test_disk_example_energy(dot_fields, opts, radial_disk):
    p, q = dot_fields
    gs = solve_nonlinear(radial_disk, p, q, opts)
    assert gs.in_interval
    assert gs.lambda_squared == pytest.approx(DOT_LAMBDA_SQUARED, rel=DOT_BAND)


def test_disk_example_is_mesh_converged(opts):
    values = []
    for n in (2048, 4096):
        mesh = build_disk_radial(2.4, n)
        p = make_annular_characteristic(mesh, 0.27, 2.26, 2.4)
        q = make_annular_characteristic(mesh, 2.13, 2.13, 2.4)
        values.append(solve_nonlinear(mesh, p, q, opts).lambda_squared)
    assert values[1] == pytest.approx(values[0], rel=2e-3)


def test_rayleigh_functional_is_minimized_by_the_ground_state(radial_disk, dot_fields, opts, rng):
    p, q = dot_fields
    gs = solve_nonlinear(radial_disk, p, q, opts)
    assert rayleigh_functional(radial_disk, p, q, gs.u, GAMMA) == pytest.approx(gs.lam, rel=1e-8)
    for _ in range(5):
        w = gs.u * (1.0 + 0.2 * rng.standard_normal(radial_disk.n_cells))
        assert rayleigh_functional(radial_disk, p, q, w, GAMMA) >= gs.lam - 1e-9


def test_rayleigh_functional_is_scale_invariant(radial_disk, dot_fields):
    p, q = dot_fields
    u = np.cos(radial_disk.radii * math.pi / 4.8)
    assert rayleigh_functional(radial_disk, p, q, 3.0 * u, GAMMA) == pytest.approx(
        rayleigh_functional(radial_disk, p, q, u, GAMMA), rel=1e-12
    )


def test_rayleigh_functional_undefined_marker(radial_disk, dot_fields):
    p, q = dot_fields
    u = np.cos(radial_disk.radii * math.pi / 4.8)
    assert rayleigh_functional(radial_disk, p, q, u, GAMMA, q_sup=0.01) is None
    assert rayleigh_functional(radial_disk, p, q, u, GAMMA, q_sup=2.13) is not None
    with pytest.raises(ArgumentError):
        rayleigh_functional(radial_disk, p, q, np.zeros(radial_disk.n_cells), GAMMA)


def test_hellmann_feynman_slope_matches_finite_difference(opts, rng):
    mesh = build_rectangle(1.0, 1.0, 12, 12)
    p, q = 0.3 * rng.random(mesh.n_cells), rng.random(mesh.n_cells)
    lam, delta = 0.6, 1e-4
    _, u = frozen_eigenpair(mesh, p, q, lam, opts)
    mu_plus, _ = frozen_eigenpair(mesh, p, q, lam + delta, opts)
    mu_minus, _ = frozen_eigenpair(mesh, p, q, lam - delta, opts)
    assert hellmann_feynman_slope(mesh, p, u) == pytest.approx((mu_plus - mu_minus) / (2 * delta), rel=1e-5)


def test_g_is_positive_at_zero(dot_fields, opts, radial_disk):
    p, q = dot_fields
    mu, _ = frozen_eigenpair(radial_disk, p, q, 0.0, opts)
    assert mu > 0


def test_sparse_and_dense_eigensolvers_agree(rng):
    mesh = build_rectangle(1.0, 1.0, 24, 24)
    V = rng.random(mesh.n_cells)
    mu_sparse, u_sparse = linear_ground_state(mesh, V, 1.0, dense_limit=0)
    mu_dense, u_dense = linear_ground_state(mesh, V, 1.0, dense_limit=10_000)
    assert mu_sparse == pytest.approx(mu_dense, rel=1e-9)
    np.testing.assert_allclose(u_sparse, u_dense, atol=1e-5)
    assert integrate(mesh, u_dense) > 0


def test_level_set_fraction():
    assert level_set_fraction(np.array([1.0, 2.0, 3.0])) == 0.0
    assert level_set_fraction(np.array([1.0, 1.0, 3.0, 4.0])) == pytest.approx(0.5)


def test_negative_potential_rejected(opts):
    mesh = build_disk_radial(1.0, 16)
    with pytest.raises(ArgumentError):
        solve_nonlinear(mesh, -np.ones(16), np.zeros(16), opts)


def test_options_from_settings():
    opts = SolverOptions.from_settings(Settings(_env_file=None), gamma=0.5, root_tol=None)
    assert opts.gamma == 0.5
    assert opts.root_tol == 1e-9
    with pytest.raises(ArgumentError):
        SolverOptions(gamma=0.0)


def test_ground_state_does_not_depend_on_the_warm_start(rng):
    mesh = build_rectangle(1.0, 1.0, 24, 24)
    V = 3.0 * rng.random(mesh.n_cells)
    reference = linear_ground_state(mesh, V, 0.5, dense_limit=0)
    for _ in range(3):
        mu, u = linear_ground_state(mesh, V, 0.5, dense_limit=0, warm_start=rng.random(mesh.n_cells))
        assert mu == pytest.approx(reference[0], rel=1e-10)
        np.testing.assert_allclose(u, reference[1], atol=1e-6)


def test_eigenvalue_error_is_second_order():
    errors = []
    for n in (16, 32, 64):
        mesh = build_rectangle(1.0, 1.0, n, n)
        mu, _ = linear_ground_state(mesh, np.zeros(mesh.n_cells), 1.0)
        errors.append(2 * math.pi ** 2 - mu)
    assert errors[0] / errors[1] == pytest.approx(4.0, abs=0.1)
    assert errors[1] / errors[2] == pytest.approx(4.0, abs=0.1)


@pytest.mark.slow
def test_square_of_side_pi_without_potentials(opts):
    mesh = build_rectangle(math.pi, math.pi, 256, 256)
    zeros = np.zeros(mesh.n_cells)
    gs = solve_nonlinear(mesh, zeros, zeros, opts)
    assert gs.lambda_squared == pytest.approx(2.0 * GAMMA, rel=1e-3)
