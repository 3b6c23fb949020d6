"""Discrete domain, field containers and physical parameters.

The domain is the box Omega = (0,1) x (0,1) x (-h, 0), periodic in the two
horizontal directions. Horizontal samples live at x_i = i/nx, y_j = j/ny
(no duplicated seam). Vertical levels are collocated and include both
boundaries: z_k = -h + k*h/nz for k = 0..nz, so k=0 is the bottom Gamma_b
and k=nz the surface Gamma_u.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Sample counts and depth for the periodic box."""

    nx: int
    ny: int
    nz: int
    h: float = 1.0

    def __post_init__(self):
        if self.nx < 4 or self.nx % 2 or self.ny < 4 or self.ny % 2:
            raise ValueError("nx, ny must be even and >= 4")
        if self.nz < 4:
            raise ValueError("nz must be >= 4")
        if not self.h > 0:
            raise ValueError("depth h must be positive")

    @property
    def dz(self) -> float:
        return self.h / self.nz

    @property
    def z(self) -> np.ndarray:
        """Vertical levels from Gamma_b (index 0) to Gamma_u (index nz)."""
        return -self.h + np.arange(self.nz + 1) * self.dz

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) / self.nx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) / self.ny

    def meshgrid(self):
        """X, Y, Z arrays of shape (nx, ny, nz+1)."""
        return np.meshgrid(self.x, self.y, self.z, indexing="ij")

    def surface_meshgrid(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def zweights(self) -> np.ndarray:
        """Trapezoid quadrature weights over (-h, 0)."""
        w = np.full(self.nz + 1, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        return w


@dataclass(frozen=True)
class PhysParams:
    """Robin coefficient alpha and buoyancy coefficients beta."""

    alpha: float = 1.0
    beta_tau: float = 1.0
    beta_sigma: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta_tau > 0 and self.beta_sigma > 0):
            raise ValueError("alpha, beta_tau, beta_sigma must be positive")


@dataclass
class ScalarField:
    """Real samples indexed (i, j, k) over nx x ny x (nz+1)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.nx, self.grid.ny, self.grid.nz + 1)
        if self.values.shape != expected:
            raise ValueError(f"field shape {self.values.shape} != {expected}")

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite field")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.nx, grid.ny, grid.nz + 1)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        X, Y, Z = grid.meshgrid()
        return cls(grid, np.asarray(fn(X, Y, Z), dtype=float)
                   + np.zeros((grid.nx, grid.ny, grid.nz + 1)))

    def __add__(self, other):
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c: float):
        return ScalarField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    @property
    def bottom(self) -> np.ndarray:
        """Samples on Gamma_b."""
        return self.values[:, :, 0]

    @property
    def top(self) -> np.ndarray:
        """Samples on Gamma_u."""
        return self.values[:, :, -1]


@dataclass
class HVectorField:
    """Two-component horizontal vector field v = (v1, v2)."""

    v1: ScalarField
    v2: ScalarField

    def __post_init__(self):
        if self.v1.grid != self.v2.grid:
            raise ValueError("components must share one grid")

    @property
    def grid(self) -> Grid:
        return self.v1.grid

    def check_finite(self):
        self.v1.check_finite()
        self.v2.check_finite()

    def copy(self) -> "HVectorField":
        return HVectorField(self.v1.copy(), self.v2.copy())

    @classmethod
    def zeros(cls, grid: Grid) -> "HVectorField":
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid))

    @classmethod
    def from_functions(cls, grid: Grid, fn1, fn2) -> "HVectorField":
        return cls(ScalarField.from_function(grid, fn1),
                   ScalarField.from_function(grid, fn2))

    def __add__(self, other):
        return HVectorField(self.v1 + other.v1, self.v2 + other.v2)

    def __sub__(self, other):
        return HVectorField(self.v1 - other.v1, self.v2 - other.v2)

    def __mul__(self, c: float):
        return HVectorField(self.v1 * c, self.v2 * c)

    __rmul__ = __mul__

    def __neg__(self):
        return HVectorField(-self.v1, -self.v2)


@dataclass
class SurfaceScalarField:
    """Real samples on the horizontal torus G, indexed (i, j)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.nx, self.grid.ny)
        if self.values.shape != expected:
            raise ValueError(f"surface field shape {self.values.shape} != {expected}")

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite field")

    @classmethod
    def zeros(cls, grid: Grid) -> "SurfaceScalarField":
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    def copy(self) -> "SurfaceScalarField":
        return SurfaceScalarField(self.grid, self.values.copy())

    def __add__(self, other):
        return SurfaceScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return SurfaceScalarField(self.grid, self.values - other.values)

    def __mul__(self, c: float):
        return SurfaceScalarField(self.grid, self.values * c)

    __rmul__ = __mul__
