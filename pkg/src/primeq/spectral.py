"""Horizontal Fourier transforms, spectral derivatives and the 2D Poisson solver.

Coefficients are normalized so that the (0,0) mode equals the horizontal mean
and a pure cosine cos(2*pi*x) has coefficient 1/2 in each of the (+-1, 0)
modes. Wavenumber layout follows numpy.fft.fftfreq.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as _sfft

from .grid import Grid, ScalarField, SurfaceScalarField


def fft2(values: np.ndarray) -> np.ndarray:
    """Unnormalized horizontal FFT over the first two axes."""
    return _sfft.fft2(values, axes=(0, 1))


def ifft2(coeffs: np.ndarray) -> np.ndarray:
    return _sfft.ifft2(coeffs, axes=(0, 1))


@dataclass
class SpectrumField:
    """Layer-wise horizontal Fourier coefficients of a ScalarField."""

    grid: Grid
    coeffs: np.ndarray  # complex, (nx, ny, nz+1)

    def __post_init__(self):
        expected = (self.grid.nx, self.grid.ny, self.grid.nz + 1)
        if self.coeffs.shape != expected:
            raise ValueError(f"spectrum shape {self.coeffs.shape} != {expected}")


@lru_cache(maxsize=None)
def wavenumbers(grid: Grid):
    """Integer wavenumbers (kx, ky) broadcastable to (nx, ny)."""
    kx = np.fft.fftfreq(grid.nx, 1.0 / grid.nx)[:, None]
    ky = np.fft.fftfreq(grid.ny, 1.0 / grid.ny)[None, :]
    kx.flags.writeable = ky.flags.writeable = False
    return kx, ky


@lru_cache(maxsize=None)
def laplace_symbol(grid: Grid) -> np.ndarray:
    """|2 pi k|^2 on the (nx, ny) mode array."""
    kx, ky = wavenumbers(grid)
    out = (2 * np.pi) ** 2 * (kx ** 2 + ky ** 2)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def effective_wavenumbers(grid: Grid):
    """Wavenumbers as seen by first derivatives: Nyquist columns zeroed.

    All solenoidality structure (divergence, projection, the parallel /
    perpendicular split in the Stokes semigroup) must use these so the
    discrete operators agree at the Nyquist modes.
    """
    kx, ky = wavenumbers(grid)
    kx = np.where(np.abs(kx) == grid.nx // 2, 0.0, kx) + 0.0 * ky
    ky = np.where(np.abs(ky) == grid.ny // 2, 0.0, ky) + 0.0 * kx
    kx.flags.writeable = ky.flags.writeable = False
    return kx, ky


@lru_cache(maxsize=None)
def effective_laplace_symbol(grid: Grid) -> np.ndarray:
    kx, ky = effective_wavenumbers(grid)
    out = (2 * np.pi) ** 2 * (kx ** 2 + ky ** 2)
    out.flags.writeable = False
    return out


def hfft(f: ScalarField) -> SpectrumField:
    f.check_finite()
    coeffs = fft2(f.values) / (f.grid.nx * f.grid.ny)
    return SpectrumField(f.grid, coeffs)


def ihfft(s: SpectrumField) -> ScalarField:
    vals = ifft2(s.coeffs * (s.grid.nx * s.grid.ny)).real
    return ScalarField(s.grid, vals)


@lru_cache(maxsize=None)
def _derivative_symbol(grid: Grid, axis: str, order: int) -> np.ndarray:
    kx, ky = wavenumbers(grid)
    if axis == "x":
        k = kx + 0.0 * ky
        nyq = np.abs(kx) == grid.nx // 2
    elif axis == "y":
        k = ky + 0.0 * kx
        nyq = np.abs(ky) == grid.ny // 2
    else:
        raise ValueError("axis must be 'x' or 'y'")
    sym = (2j * np.pi * k) ** order
    if order % 2:
        # odd derivatives of real data: kill the ambiguous Nyquist mode
        sym = np.where(np.broadcast_to(nyq, sym.shape), 0.0, sym)
    sym = np.ascontiguousarray(sym)
    sym.flags.writeable = False
    return sym


def horizontal_derivative(f: ScalarField, axis: str, order: int = 1) -> ScalarField:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    sym = _derivative_symbol(f.grid, axis, order)
    s = hfft(f)
    s.coeffs *= sym[:, :, None]
    return ihfft(s)


def surface_derivative(f: SurfaceScalarField, axis: str, order: int = 1) -> SurfaceScalarField:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    sym = _derivative_symbol(f.grid, axis, order)
    coeffs = fft2(f.values) * sym
    return SurfaceScalarField(f.grid, ifft2(coeffs).real)


def poisson2d_solve(rhs: SurfaceScalarField) -> SurfaceScalarField:
    """Solve Delta_H q = rhs on the torus with mean(q) = 0."""
    rhs.check_finite()
    norm = np.sqrt(np.mean(rhs.values ** 2))
    mean = abs(np.mean(rhs.values))
    if mean > max(1e-10 * norm, 1e-14):
        raise ValueError("incompatible Poisson data")
    coeffs = fft2(rhs.values)
    # the Nyquist-consistent symbol keeps div, grad and the inverse Laplacian
    # mutually exact; modes the gradient cannot represent are dropped
    lam = effective_laplace_symbol(rhs.grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        qc = np.where(lam > 0, coeffs / (-lam), 0.0)
    return SurfaceScalarField(rhs.grid, ifft2(qc).real)


@lru_cache(maxsize=None)
def dealias_mask(grid: Grid) -> np.ndarray:
    """2/3-rule mask on the (nx, ny) mode array."""
    kx, ky = wavenumbers(grid)
    kmax_x = grid.nx / 3.0
    kmax_y = grid.ny / 3.0
    out = (np.abs(kx) < kmax_x) & (np.abs(ky) < kmax_y)
    out.flags.writeable = False
    return out


def dealias(f: ScalarField) -> ScalarField:
    mask = dealias_mask(f.grid)
    s = hfft(f)
    s.coeffs *= mask[:, :, None]
    return ihfft(s)
