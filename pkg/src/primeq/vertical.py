"""Vertical finite-difference operators for the three boundary-condition kinds.

Each kind discretizes -d^2/dz^2 on the nz+1 collocated levels with second
order accuracy:

  velocity:    Dirichlet at the bottom Gamma_b, Neumann at the surface Gamma_u
  temperature: Neumann at the bottom, Robin d_z tau + alpha tau = 0 at the surface
  salinity:    Neumann at both boundaries

Neumann and Robin rows come from centered ghost-node elimination. The
Dirichlet condition is imposed strongly: the bottom node is decoupled with a
diagonal entry above the top of the spectrum, and the first interior row uses
the eliminated stencil. With the trapezoid weight W this keeps W @ L
symmetric, so the eigenvectors are orthonormal under W and the quadratic form
<L f, f>_W equals the discrete gradient energy plus boundary terms exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .grid import Grid, PhysParams, ScalarField

KINDS = ("velocity", "temperature", "salinity")


@dataclass
class VerticalOperator:
    kind: str
    grid: Grid
    params: PhysParams
    matrix: np.ndarray        # (nz+1, nz+1), the operator for -d_zz with BCs
    eigenvalues: np.ndarray   # ascending, all >= 0 up to rounding
    eigenvectors: np.ndarray  # columns, orthonormal under the trapezoid weight
    _analysis: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self._analysis is None:
            w = self.grid.zweights
            self._analysis = (w[:, None] * self.eigenvectors)

    def to_modal(self, values: np.ndarray) -> np.ndarray:
        """Expand nodal values (..., nz+1) in the eigenvector basis."""
        return values @ self._analysis

    def from_modal(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.eigenvectors.T


def build_vertical_operator(grid: Grid, kind: str, params: PhysParams) -> VerticalOperator:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    n = grid.nz
    dz = grid.dz
    L = np.zeros((n + 1, n + 1))
    for k in range(1, n):
        L[k, k - 1] = -1.0 / dz ** 2
        L[k, k] = 2.0 / dz ** 2
        L[k, k + 1] = -1.0 / dz ** 2

    # bottom row (Gamma_b, k = 0)
    if kind == "velocity":
        # strong Dirichlet: decoupled node parked above the spectrum
        L[0, 0] = 5.0 / dz ** 2
        L[1, 0] = 0.0
    else:
        # Neumann via centered ghost f[-1] = f[1]
        L[0, 0] = 2.0 / dz ** 2
        L[0, 1] = -2.0 / dz ** 2

    # surface row (Gamma_u, k = nz)
    if kind == "temperature":
        # Robin d_z f + alpha f = 0: ghost f[n+1] = f[n-1] - 2 dz alpha f[n]
        L[n, n - 1] = -2.0 / dz ** 2
        L[n, n] = (2.0 + 2.0 * dz * params.alpha) / dz ** 2
    else:
        # Neumann via ghost f[n+1] = f[n-1]
        L[n, n - 1] = -2.0 / dz ** 2
        L[n, n] = 2.0 / dz ** 2

    w = grid.zweights
    sqw = np.sqrt(w)
    S = (sqw[:, None] * L) / sqw[None, :]
    S = 0.5 * (S + S.T)
    try:
        lam, Q = linalg.eigh(S)
    except linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError("vertical eigen-solver failure") from exc
    if lam[0] < -1e-10:
        raise RuntimeError(f"negative eigenvalue {lam[0]} for kind {kind}")
    lam = np.maximum(lam, 0.0)
    if kind == "salinity":
        # L annihilates constants exactly; deflate the eigensolver roundoff
        # so the zero mode conserves mean(sigma) to the last bit
        lam[np.abs(lam) <= 1e-10 * lam[-1]] = 0.0
    U = Q / sqw[:, None]
    return VerticalOperator(kind, grid, params, L, lam, U)


def vertical_derivative(f: ScalarField, kind: str = "salinity") -> ScalarField:
    """d_z by centered differences, one-sided second order at the boundaries.

    The stencil is BC-agnostic; kind only documents intent.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    v = f.values
    dz = f.grid.dz
    out = np.empty_like(v)
    out[:, :, 1:-1] = (v[:, :, 2:] - v[:, :, :-2]) / (2 * dz)
    out[:, :, 0] = (-3 * v[:, :, 0] + 4 * v[:, :, 1] - v[:, :, 2]) / (2 * dz)
    out[:, :, -1] = (3 * v[:, :, -1] - 4 * v[:, :, -2] + v[:, :, -3]) / (2 * dz)
    return ScalarField(f.grid, out)


def vertical_second_derivative(f: ScalarField) -> ScalarField:
    """d_zz by central differences, 4-point one-sided second order at the ends."""
    v = f.values
    dz2 = f.grid.dz ** 2
    out = np.empty_like(v)
    out[:, :, 1:-1] = (v[:, :, 2:] - 2 * v[:, :, 1:-1] + v[:, :, :-2]) / dz2
    out[:, :, 0] = (2 * v[:, :, 0] - 5 * v[:, :, 1] + 4 * v[:, :, 2] - v[:, :, 3]) / dz2
    out[:, :, -1] = (2 * v[:, :, -1] - 5 * v[:, :, -2] + 4 * v[:, :, -3] - v[:, :, -4]) / dz2
    return ScalarField(f.grid, out)
