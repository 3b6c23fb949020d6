import numpy as np
import pytest

from primeq.grid import Grid, HVectorField, PhysParams, ScalarField
from primeq.hydrostatic import (baroclinic_gradient, classify_initial_data,
                                helmholtz_project, mean_divergence,
                                reconstruct_pressure_gradient, reconstruct_w,
                                vertical_average)
from primeq.norms import lp_norm
from primeq.spectral import horizontal_derivative
from primeq.testfields import random_smooth_velocity

GRID = Grid(16, 16, 32)
PARAMS = PhysParams()


def test_average_of_constant():
    v = HVectorField(ScalarField(GRID, np.full((16, 16, 33), 2.0)),
                     ScalarField(GRID, np.full((16, 16, 33), -3.0)))
    u1, u2 = vertical_average(v)
    assert np.allclose(u1.values, 2.0)
    assert np.allclose(u2.values, -3.0)


def test_average_of_z_squared():
    v = HVectorField(ScalarField.from_function(GRID, lambda X, Y, Z: Z ** 2),
                     ScalarField.zeros(GRID))
    u1, _ = vertical_average(v)
    # int_{-1}^0 z^2 dz = 1/3, trapezoid error O(nz^-2)
    assert np.max(np.abs(u1.values - 1.0 / 3.0)) < 2.0 / GRID.nz ** 2


def test_average_linearity():
    rng = np.random.default_rng(0)
    a = random_smooth_velocity(GRID, rng)
    b = random_smooth_velocity(GRID, rng)
    u1, _ = vertical_average(a + 2.0 * b)
    ua, _ = vertical_average(a)
    ub, _ = vertical_average(b)
    assert np.max(np.abs(u1.values - ua.values - 2 * ub.values)) < 1e-13


def test_projection_fixed_point():
    v = HVectorField.from_functions(
        GRID, lambda X, Y, Z: np.sin(2 * np.pi * Y) + 0.0 * Z,
        lambda X, Y, Z: 0.0 * X)
    res = helmholtz_project(v)
    assert lp_norm(res.projected - v, 2) <= 1e-12 * lp_norm(v, 2)
    assert np.max(np.abs(res.gradient_part.values)) < 1e-12


def test_projection_kills_pure_gradient():
    v = HVectorField.from_functions(
        GRID, lambda X, Y, Z: 2 * np.pi * np.cos(2 * np.pi * X) + 0.0 * Z,
        lambda X, Y, Z: 0.0 * X)
    res = helmholtz_project(v)
    assert lp_norm(res.projected, 2) <= 1e-10 * lp_norm(v, 2)
    X, _ = GRID.surface_meshgrid()
    assert np.max(np.abs(res.gradient_part.values - np.sin(2 * np.pi * X))) < 1e-10


def test_projection_idempotent():
    rng = np.random.default_rng(1)
    v = random_smooth_velocity(GRID, rng)
    p1 = helmholtz_project(v).projected
    p2 = helmholtz_project(p1).projected
    assert lp_norm(p2 - p1, 2) <= 1e-12 * lp_norm(v, 2)
    div = mean_divergence(p1)
    assert np.sqrt(np.mean(div.values ** 2)) <= 1e-10 * lp_norm(v, 2)


def test_w_zero_for_divergence_free():
    v = HVectorField.from_functions(
        GRID, lambda X, Y, Z: np.sin(2 * np.pi * Y) + 0.0 * Z,
        lambda X, Y, Z: 0.0 * X)
    w = reconstruct_w(v)
    assert np.max(np.abs(w.values)) < 1e-12


def test_w_analytic():
    v = HVectorField.from_functions(
        GRID, lambda X, Y, Z: np.cos(2 * np.pi * X) * (Z + 1) ** 2,
        lambda X, Y, Z: 0.0 * X)
    w = reconstruct_w(v)
    X, _, Z = GRID.meshgrid()
    exact = (2 * np.pi / 3) * np.sin(2 * np.pi * X) * (Z + 1) ** 3
    assert np.max(np.abs(w.values - exact)) < 10.0 / GRID.nz ** 2
    assert np.max(np.abs(w.values[:, :, 0])) == 0.0


def test_w_vanishes_at_surface_after_projection():
    rng = np.random.default_rng(2)
    v = helmholtz_project(random_smooth_velocity(GRID, rng)).projected
    w = reconstruct_w(v)
    assert np.max(np.abs(w.values[:, :, -1])) <= 1e-8 * lp_norm(v, 2)


def test_baroclinic_cancellation():
    rng = np.random.default_rng(3)
    tau = ScalarField(GRID, rng.standard_normal((16, 16, 33)))
    pi = baroclinic_gradient(tau, tau, PARAMS)  # beta_tau = beta_sigma
    assert np.max(np.abs(pi.v1.values)) < 1e-12


def test_baroclinic_z_only_field():
    tau = ScalarField.from_function(GRID, lambda X, Y, Z: Z ** 2)
    pi = baroclinic_gradient(tau, ScalarField.zeros(GRID), PARAMS)
    assert np.max(np.abs(pi.v1.values)) < 1e-12
    assert np.max(np.abs(pi.v2.values)) < 1e-12


def test_baroclinic_analytic():
    tau = ScalarField.from_function(GRID, lambda X, Y, Z: np.cos(2 * np.pi * X))
    pi = baroclinic_gradient(tau, ScalarField.zeros(GRID), PARAMS)
    X, _, Z = GRID.meshgrid()
    exact = 2 * np.pi * (Z + 1) * np.sin(2 * np.pi * X)
    assert np.max(np.abs(pi.v1.values - exact)) < 10.0 / GRID.nz ** 2


def test_pressure_reconstruction_pure_gradient_forcing():
    f = HVectorField.from_functions(
        GRID, lambda X, Y, Z: 2 * np.pi * np.cos(2 * np.pi * X) + 0.0 * Z,
        lambda X, Y, Z: 0.0 * X)
    zero = ScalarField.zeros(GRID)
    grad, pi_s = reconstruct_pressure_gradient(
        HVectorField.zeros(GRID), zero, zero, f, PARAMS)
    X, _ = GRID.surface_meshgrid()
    assert np.max(np.abs(pi_s.values - np.sin(2 * np.pi * X))) < 1e-10
    assert np.max(np.abs(grad.v1.values - f.v1.values)) < 1e-10


def test_pressure_reconstruction_zero_inputs():
    zero = ScalarField.zeros(GRID)
    _, pi_s = reconstruct_pressure_gradient(
        HVectorField.zeros(GRID), zero, zero, HVectorField.zeros(GRID), PARAMS)
    assert np.max(np.abs(pi_s.values)) == 0.0


def test_classifier_requires_positive_tol():
    zero = ScalarField.zeros(GRID)
    with pytest.raises(ValueError):
        classify_initial_data(HVectorField.zeros(GRID), zero, zero, tol=0.0)


def test_classifier_divergent_field_rejected():
    v = HVectorField.from_functions(
        GRID, lambda X, Y, Z: np.sin(2 * np.pi * X) + 0.0 * Z,
        lambda X, Y, Z: 0.0 * X)
    zero = ScalarField.zeros(GRID)
    cl = classify_initial_data(v, zero, zero)
    assert not cl.solenoidal
    assert "solenoidal" in cl.velocity_band
