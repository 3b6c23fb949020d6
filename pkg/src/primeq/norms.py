"""Quadrature and the norm library: Lp, anisotropic, Sobolev, fractional.

Horizontal integrals are exact means of the equispaced samples (spectrally
accurate for trigonometric polynomials); vertical integrals use the trapezoid
rule (order 2). Fractional norms are defined for p = 2 only, through the
multiplier (1 + lambda_total)^{s/2} in the horizontal-Fourier x vertical-
eigenvector basis of the requested operator kind.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, HVectorField, PhysParams, ScalarField
from .spectral import horizontal_derivative, laplace_symbol
from .vertical import (VerticalOperator, build_vertical_operator,
                       vertical_derivative, vertical_second_derivative)

_OPERATOR_CACHE: dict = {}


def get_vertical_operator(grid: Grid, kind: str,
                          params: PhysParams | None = None) -> VerticalOperator:
    params = params or PhysParams()
    key = (grid, kind, params)
    if key not in _OPERATOR_CACHE:
        _OPERATOR_CACHE[key] = build_vertical_operator(grid, kind, params)
    return _OPERATOR_CACHE[key]


def integrate(f: ScalarField) -> float:
    """Integral of f over the box Omega."""
    f.check_finite()
    return float(np.mean(f.values, axis=(0, 1)) @ f.grid.zweights)


def _magnitude(f) -> ScalarField:
    if isinstance(f, HVectorField):
        return ScalarField(f.grid, np.hypot(f.v1.values, f.v2.values))
    return f


def lp_norm(f, p: float) -> float:
    """Lp(Omega) norm; vector fields use the pointwise Euclidean magnitude."""
    if p < 1:
        raise ValueError("p must be >= 1")
    g = _magnitude(f)
    g.check_finite()
    if np.isinf(p):
        return float(np.max(np.abs(g.values)))
    absg = np.abs(g.values) ** p
    return float(np.mean(absg, axis=(0, 1)) @ g.grid.zweights) ** (1.0 / p)


def anisotropic_norm(f: ScalarField, q_z: float, p_xy: float) -> float:
    """L^{q_z}_z L^{p_xy}_{xy} norm: horizontal Lp per level, then vertical Lq."""
    if q_z < 1 or p_xy < 1:
        raise ValueError("exponents must be >= 1")
    g = _magnitude(f)
    g.check_finite()
    if np.isinf(p_xy):
        levels = np.max(np.abs(g.values), axis=(0, 1))
    else:
        levels = np.mean(np.abs(g.values) ** p_xy, axis=(0, 1)) ** (1.0 / p_xy)
    if np.isinf(q_z):
        return float(np.max(levels))
    return float(levels ** q_z @ g.grid.zweights) ** (1.0 / q_z)


def gradient_components(f: ScalarField) -> list[ScalarField]:
    return [horizontal_derivative(f, "x"), horizontal_derivative(f, "y"),
            vertical_derivative(f)]


def sobolev_norm(f, order: int) -> float:
    """H^order norm (order 0, 1 or 2), sqrt of the sum of squared L2 norms."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    comps = [f.v1, f.v2] if isinstance(f, HVectorField) else [f]
    total = 0.0
    for g in comps:
        total += lp_norm(g, 2) ** 2
        if order >= 1:
            firsts = gradient_components(g)
            total += sum(lp_norm(d, 2) ** 2 for d in firsts)
        if order == 2:
            gx, gy, gz = firsts
            seconds = [horizontal_derivative(g, "x", 2),
                       horizontal_derivative(g, "y", 2),
                       vertical_second_derivative(g),
                       horizontal_derivative(gx, "y"),
                       vertical_derivative(gx),
                       vertical_derivative(gy)]
            total += sum(lp_norm(d, 2) ** 2 for d in seconds)
    return float(np.sqrt(total))


def modal_coefficients(f: ScalarField, op: VerticalOperator) -> np.ndarray:
    """Coefficients in the horizontal-Fourier x vertical-eigenvector basis.

    Normalized so that sum |c|^2 equals the squared discrete L2 norm.
    """
    fhat = np.fft.fft2(f.values, axes=(0, 1)) / (f.grid.nx * f.grid.ny)
    return op.to_modal(fhat)


def fractional_h_norm(f, s: float, kind: str,
                      params: PhysParams | None = None) -> float:
    """H^s-type norm from the (1 + lambda_total)^{s/2} multiplier, p = 2 only."""
    if not 0 <= s <= 2:
        raise ValueError("s must lie in [0, 2]")
    comps = [f.v1, f.v2] if isinstance(f, HVectorField) else [f]
    total = 0.0
    for g in comps:
        g.check_finite()
        op = get_vertical_operator(g.grid, kind, params)
        c = modal_coefficients(g, op)
        lam_total = laplace_symbol(g.grid)[:, :, None] + op.eigenvalues[None, None, :]
        total += float(np.sum((1.0 + lam_total) ** s * np.abs(c) ** 2))
    return float(np.sqrt(total))
