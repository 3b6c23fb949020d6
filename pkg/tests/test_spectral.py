import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primeq.grid import Grid, ScalarField, SurfaceScalarField
from primeq.spectral import (dealias, hfft, horizontal_derivative, ihfft,
                             poisson2d_solve, surface_derivative)

GRID = Grid(16, 16, 8)


def test_roundtrip_identity():
    rng = np.random.default_rng(0)
    f = ScalarField(GRID, rng.standard_normal((16, 16, 9)))
    back = ihfft(hfft(f))
    scale = np.max(np.abs(f.values))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * scale


def test_constant_field_spectrum():
    f = ScalarField(GRID, np.full((16, 16, 9), 3.5))
    s = hfft(f)
    assert s.coeffs[0, 0, 0] == pytest.approx(3.5)
    rest = s.coeffs.copy()
    rest[0, 0, :] = 0.0
    assert np.max(np.abs(rest)) < 1e-14


def test_cosine_mode_coefficients():
    f = ScalarField.from_function(GRID, lambda X, Y, Z: np.cos(2 * np.pi * X))
    s = hfft(f)
    assert s.coeffs[1, 0, 0] == pytest.approx(0.5, abs=1e-12)
    assert s.coeffs[-1, 0, 0] == pytest.approx(0.5, abs=1e-12)


def test_derivative_analytic():
    f = ScalarField.from_function(GRID, lambda X, Y, Z: np.sin(2 * np.pi * X))
    fx = horizontal_derivative(f, "x")
    X, _, _ = GRID.meshgrid()
    exact = 2 * np.pi * np.cos(2 * np.pi * X)
    assert np.max(np.abs(fx.values - exact)) < 1e-10


def test_derivative_of_constant_is_zero():
    f = ScalarField(GRID, np.ones((16, 16, 9)))
    assert np.max(np.abs(horizontal_derivative(f, "x").values)) < 1e-13
    assert np.max(np.abs(horizontal_derivative(f, "y", 2).values)) < 1e-13


def test_cross_derivative_vanishes():
    f = ScalarField.from_function(GRID, lambda X, Y, Z: np.sin(2 * np.pi * X))
    assert np.max(np.abs(horizontal_derivative(f, "y").values)) < 1e-12


def test_derivative_order_validation():
    f = ScalarField.zeros(GRID)
    with pytest.raises(ValueError):
        horizontal_derivative(f, "x", 3)
    with pytest.raises(ValueError):
        surface_derivative(SurfaceScalarField.zeros(GRID), "z")


def test_poisson_analytic():
    rhs = SurfaceScalarField(
        GRID, np.sin(2 * np.pi * GRID.x)[:, None] * np.ones((1, 16)))
    q = poisson2d_solve(rhs)
    exact = -np.sin(2 * np.pi * GRID.x)[:, None] / (4 * np.pi ** 2)
    assert np.max(np.abs(q.values - exact)) < 1e-12
    assert abs(np.mean(q.values)) < 1e-14


def test_poisson_zero_and_incompatible():
    q = poisson2d_solve(SurfaceScalarField.zeros(GRID))
    assert np.max(np.abs(q.values)) == 0.0
    with pytest.raises(ValueError, match="incompatible"):
        poisson2d_solve(SurfaceScalarField(GRID, np.ones((16, 16))))


def test_poisson_laplacian_inverse():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal((16, 16))
    vals -= vals.mean()
    rhs = SurfaceScalarField(GRID, vals)
    q = poisson2d_solve(rhs)
    back = (surface_derivative(q, "x", 2) + surface_derivative(q, "y", 2))
    # resolved (non-Nyquist) modes reproduce the data spectrally
    err = np.fft.fft2(back.values - rhs.values)
    err[np.abs(np.fft.fftfreq(16, 1 / 16)) == 8, :] = 0.0
    err[:, np.abs(np.fft.fftfreq(16, 1 / 16)) == 8] = 0.0
    assert np.max(np.abs(err)) / np.max(np.abs(np.fft.fft2(rhs.values))) < 1e-10


def test_dealias_keeps_low_modes():
    f = ScalarField.from_function(
        GRID, lambda X, Y, Z: np.cos(2 * np.pi * X) + np.cos(14 * np.pi * X))
    d = dealias(f)
    s = hfft(d)
    assert s.coeffs[1, 0, 0] == pytest.approx(0.5, abs=1e-12)
    assert abs(s.coeffs[7, 0, 0]) < 1e-14


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_roundtrip_property(seed):
    rng = np.random.default_rng(seed)
    f = ScalarField(GRID, rng.uniform(-5, 5, (16, 16, 9)))
    back = ihfft(hfft(f))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * (
        np.max(np.abs(f.values)) + 1e-300)
