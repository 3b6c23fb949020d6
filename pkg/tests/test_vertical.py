import numpy as np
import pytest

from primeq.grid import Grid, PhysParams, ScalarField
from primeq.testfields import robin_mu
from primeq.vertical import (build_vertical_operator, vertical_derivative,
                             vertical_second_derivative)

# continuum eigen-oracles at h = 1, alpha = 1, computed independently:
#   velocity:    smallest eigenvalue (pi/2)^2
#   temperature: mu^2 with mu the root of mu tan(mu) = 1 (bisection)
#   salinity:    0 with constant eigenvector
VELOCITY_RATE = 2.4674011002723395       # pi^2 / 4
ROBIN_MU = 0.8603335890193797
TEMPERATURE_RATE = 0.740173884394967     # mu^2

PARAMS = PhysParams()


def test_robin_mu_oracle():
    mu = robin_mu(1.0, 1.0)
    assert mu == pytest.approx(ROBIN_MU, abs=1e-12)
    assert mu * np.tan(mu) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("kind,oracle", [
    ("velocity", VELOCITY_RATE),
    ("temperature", TEMPERATURE_RATE),
])
def test_smallest_eigenvalue_second_order(kind, oracle):
    errs = []
    for nz in (16, 32, 64):
        op = build_vertical_operator(Grid(4, 4, nz), kind, PARAMS)
        errs.append(abs(op.eigenvalues[0] - oracle))
    order = np.polyfit(np.log2([16, 32, 64]), -np.log2(errs), 1)[0]
    assert abs(order - 2.0) < 0.3
    assert errs[-1] < 0.02 * oracle


def test_salinity_null_mode():
    op = build_vertical_operator(Grid(4, 4, 32), "salinity", PARAMS)
    assert op.eigenvalues[0] == 0.0
    vec = op.eigenvectors[:, 0]
    assert np.max(np.abs(vec - vec[0])) < 1e-10 * abs(vec[0])


def test_temperature_spectrum_positive():
    op = build_vertical_operator(Grid(4, 4, 16), "temperature", PARAMS)
    assert np.all(op.eigenvalues > 0)


def test_weighted_orthonormality_and_roundtrip():
    for kind in ("velocity", "temperature", "salinity"):
        op = build_vertical_operator(Grid(4, 4, 16), kind, PARAMS)
        w = op.grid.zweights
        gram = op.eigenvectors.T @ (w[:, None] * op.eigenvectors)
        assert np.max(np.abs(gram - np.eye(17))) < 1e-10
        rng = np.random.default_rng(0)
        f = rng.standard_normal((4, 4, 17))
        back = op.from_modal(op.to_modal(f))
        assert np.max(np.abs(back - f)) < 1e-10


def test_quadratic_form_is_gradient_energy():
    # <L f, f>_W = |D f|^2 + boundary terms; temperature adds alpha f(0)^2
    grid = Grid(4, 4, 64)
    op = build_vertical_operator(grid, "temperature", PARAMS)
    rng = np.random.default_rng(2)
    f = rng.standard_normal(grid.nz + 1)
    w = grid.zweights
    lhs = f @ (w[:, None] * op.matrix) @ f
    df = np.diff(f) / grid.dz
    rhs = np.sum(df ** 2) * grid.dz + PARAMS.alpha * f[-1] ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        build_vertical_operator(Grid(4, 4, 8), "pressure", PARAMS)


def test_vertical_derivative_analytic():
    grid = Grid(4, 4, 64)
    f = ScalarField.from_function(grid, lambda X, Y, Z: Z ** 2)
    df = vertical_derivative(f)
    _, _, Z = grid.meshgrid()
    assert np.max(np.abs(df.values - 2 * Z)) < 1e-10


def test_vertical_derivative_constant():
    grid = Grid(4, 4, 8)
    f = ScalarField(grid, np.ones((4, 4, 9)))
    assert np.max(np.abs(vertical_derivative(f).values)) < 1e-13


def test_vertical_derivative_eigenprofile_surface():
    errs = []
    for nz in (16, 32, 64):
        grid = Grid(4, 4, nz)
        f = ScalarField.from_function(
            grid, lambda X, Y, Z: np.cos(np.pi * Z / 2))
        errs.append(np.max(np.abs(vertical_derivative(f).values[:, :, -1])))
    order = np.polyfit(np.log2([16, 32, 64]), -np.log2(errs), 1)[0]
    assert order > 1.7


def test_second_derivative_quadratic_exact():
    grid = Grid(4, 4, 16)
    f = ScalarField.from_function(grid, lambda X, Y, Z: Z ** 2)
    d2 = vertical_second_derivative(f)
    assert np.max(np.abs(d2.values - 2.0)) < 1e-9
