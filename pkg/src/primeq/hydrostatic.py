"""The hydrostatic reformulation: vertical averaging, Helmholtz projection,
diagnostic vertical velocity, baroclinic pressure gradient, surface-pressure
reconstruction and the initial-data boundary classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grid import (Grid, HVectorField, PhysParams, ScalarField,
                   SurfaceScalarField)
from .spectral import (_derivative_symbol, dealias_mask, fft2,
                       horizontal_derivative, ifft2, poisson2d_solve,
                       surface_derivative)
from .vertical import vertical_derivative, vertical_second_derivative


@dataclass
class ProjectionResult:
    projected: HVectorField
    gradient_part: SurfaceScalarField  # mean-zero potential q with grad_H q removed


def vertical_average(v: HVectorField):
    """Componentwise depth average (1/h) int_{-h}^0 v dz."""
    g = v.grid
    w = g.zweights / g.h
    return (SurfaceScalarField(g, v.v1.values @ w),
            SurfaceScalarField(g, v.v2.values @ w))


def surface_divergence(u1: SurfaceScalarField, u2: SurfaceScalarField) -> SurfaceScalarField:
    return surface_derivative(u1, "x") + surface_derivative(u2, "y")


def horizontal_divergence(v: HVectorField) -> ScalarField:
    return horizontal_derivative(v.v1, "x") + horizontal_derivative(v.v2, "y")


def mean_divergence(v: HVectorField) -> SurfaceScalarField:
    """div_H of the depth average."""
    u1, u2 = vertical_average(v)
    return surface_divergence(u1, u2)


def helmholtz_project(v: HVectorField) -> ProjectionResult:
    """Remove the z-independent horizontal gradient so that div_H vbar = 0."""
    v.check_finite()
    div = mean_divergence(v)
    q = poisson2d_solve(div)
    qx = surface_derivative(q, "x").values[:, :, None]
    qy = surface_derivative(q, "y").values[:, :, None]
    g = v.grid
    projected = HVectorField(ScalarField(g, v.v1.values - qx),
                             ScalarField(g, v.v2.values - qy))
    return ProjectionResult(projected, q)


def reconstruct_w(v: HVectorField) -> ScalarField:
    """w = -int_{-h}^z div_H v dz, vanishing at the bottom by construction."""
    div = horizontal_divergence(v)
    w = cumulative_trapezoid(-div.values, dx=v.grid.dz, axis=2, initial=0.0)
    return ScalarField(v.grid, w)


def cumulative_vertical_integral(f: ScalarField) -> ScalarField:
    """int_{-h}^z f dz by the cumulative trapezoid rule."""
    vals = cumulative_trapezoid(f.values, dx=f.grid.dz, axis=2, initial=0.0)
    return ScalarField(f.grid, vals)


def baroclinic_gradient(tau: ScalarField, sigma: ScalarField,
                        params: PhysParams) -> HVectorField:
    """Pi(tau, sigma) = -grad_H int_{-h}^z (beta_tau tau - beta_sigma sigma)."""
    if tau.grid != sigma.grid:
        raise ValueError("fields must share one grid")
    buoy = ScalarField(tau.grid, params.beta_tau * tau.values
                       - params.beta_sigma * sigma.values)
    col = cumulative_vertical_integral(buoy)
    return HVectorField(-horizontal_derivative(col, "x"),
                        -horizontal_derivative(col, "y"))


def hydrostatic_pressure(pi_s: SurfaceScalarField, tau: ScalarField,
                         sigma: ScalarField, params: PhysParams) -> ScalarField:
    """Diagnostic 3D pressure from d_z pi = -1 + beta_tau(tau-1) - beta_sigma(sigma-1).

    Integrated downward from pi(z=0) = pi_s. Not used by the solver.
    """
    g = tau.grid
    rhs = ScalarField(g, -1.0 + params.beta_tau * (tau.values - 1.0)
                      - params.beta_sigma * (sigma.values - 1.0))
    col = cumulative_vertical_integral(rhs)
    # shift so the surface level matches pi_s
    vals = col.values - col.values[:, :, -1:] + pi_s.values[:, :, None]
    return ScalarField(g, vals)


def laplacian(f: ScalarField) -> ScalarField:
    return (horizontal_derivative(f, "x", 2) + horizontal_derivative(f, "y", 2)
            + vertical_second_derivative(f))


def _dealias_values(grid, values: np.ndarray) -> np.ndarray:
    mask = dealias_mask(grid)[:, :, None]
    return ifft2(fft2(values) * mask).real


def advection(v: HVectorField, w: ScalarField, f: ScalarField,
              dealias_products: bool = True,
              _predealiased: bool = False) -> ScalarField:
    """v . grad_H f + w d_z f in advective form (optionally 2/3-dealiased).

    With _predealiased the caller has already filtered v and w, which saves
    the repeated transforms when several fields are advected by one velocity.
    """
    if not dealias_products:
        fx = horizontal_derivative(f, "x")
        fy = horizontal_derivative(f, "y")
        fz = vertical_derivative(f)
        return ScalarField(f.grid, v.v1.values * fx.values
                           + v.v2.values * fy.values + w.values * fz.values)
    g = f.grid
    mask = dealias_mask(g)[:, :, None]
    fhat = fft2(f.values)
    sx = _derivative_symbol(g, "x", 1)[:, :, None]
    sy = _derivative_symbol(g, "y", 1)[:, :, None]
    fx = ifft2(fhat * (sx * mask)).real
    fy = ifft2(fhat * (sy * mask)).real
    fz = _dealias_values(g, vertical_derivative(f).values)
    if _predealiased:
        v1, v2, wd = v.v1.values, v.v2.values, w.values
    else:
        v1 = _dealias_values(g, v.v1.values)
        v2 = _dealias_values(g, v.v2.values)
        wd = _dealias_values(g, w.values)
    out = v1 * fx + v2 * fy + wd * fz
    return ScalarField(g, _dealias_values(g, out))


def dealiased_transport(v: HVectorField, w: ScalarField):
    """Pre-filtered copies of the transporting fields."""
    g = v.grid
    return (HVectorField(ScalarField(g, _dealias_values(g, v.v1.values)),
                         ScalarField(g, _dealias_values(g, v.v2.values))),
            ScalarField(g, _dealias_values(g, w.values)))


def velocity_advection(v: HVectorField, dealias_products: bool = True) -> HVectorField:
    w = reconstruct_w(v)
    if dealias_products:
        vd, wd = dealiased_transport(v, w)
        return HVectorField(advection(vd, wd, v.v1, True, _predealiased=True),
                            advection(vd, wd, v.v2, True, _predealiased=True))
    return HVectorField(advection(v, w, v.v1, dealias_products),
                        advection(v, w, v.v2, dealias_products))


def reconstruct_pressure_gradient(v: HVectorField, tau: ScalarField,
                                  sigma: ScalarField, f: HVectorField,
                                  params: PhysParams):
    """Surface-pressure gradient as the (1 - P) part of the momentum balance.

    grad_H pi_s = (1 - P) { f + Pi(zeta) + Delta v - (v . grad_H v + w d_z v) },
    with the +Delta v sign, so the linear (v = 0 nonlinearity) and nonlinear
    reconstructions agree. Returns the z-independent gradient field and the
    mean-zero potential pi_s.
    """
    pi = baroclinic_gradient(tau, sigma, params)
    adv = velocity_advection(v)
    lap = HVectorField(laplacian(v.v1), laplacian(v.v2))
    r1 = f.v1.values + pi.v1.values + lap.v1.values - adv.v1.values
    r2 = f.v2.values + pi.v2.values + lap.v2.values - adv.v2.values
    g = v.grid
    rhs = HVectorField(ScalarField(g, r1), ScalarField(g, r2))
    div = mean_divergence(rhs)
    pi_s = poisson2d_solve(div)
    gx = surface_derivative(pi_s, "x")
    gy = surface_derivative(pi_s, "y")
    grad = HVectorField(
        ScalarField(g, np.broadcast_to(gx.values[:, :, None],
                                       (g.nx, g.ny, g.nz + 1)).copy()),
        ScalarField(g, np.broadcast_to(gy.values[:, :, None],
                                       (g.nx, g.ny, g.nz + 1)).copy()))
    return grad, pi_s


_BAND_LOW = "theta < 1/2p only"
_BAND_MID = "1/2p < theta <= 1/2 + 1/2p"
_BAND_HIGH = "D(A_p)-compatible"
_BAND_SCALAR_LOW = "theta < 1/2 + 1/2q"
_BAND_SCALAR_HIGH = "D-compatible"


@dataclass
class Classification:
    velocity_residuals: dict
    tau_residuals: dict
    sigma_residuals: dict
    velocity_band: str
    tau_band: str
    sigma_band: str
    solenoidal: bool


def classify_initial_data(v: HVectorField, tau: ScalarField, sigma: ScalarField,
                          tol: float = 1e-8,
                          params: PhysParams | None = None) -> Classification:
    """Boundary-condition regularity bands for the initial data.

    Velocity: div_H vbar = 0 is required for membership at any regularity;
    v = 0 on Gamma_b buys the middle band; additionally d_z v = 0 on Gamma_u
    buys the top band. Temperature and salinity only see their boundary
    conditions in the top band.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    params = params or PhysParams()

    def surf_norm(arr):
        return float(np.sqrt(np.mean(arr ** 2)))

    from .norms import lp_norm
    vnorm = max(lp_norm(v, 2), 1e-300)
    dzv1 = vertical_derivative(v.v1)
    dzv2 = vertical_derivative(v.v2)
    div = mean_divergence(v)
    vres = {
        "div": float(np.sqrt(np.mean(div.values ** 2))) / vnorm,
        "bottom": np.hypot(surf_norm(v.v1.bottom), surf_norm(v.v2.bottom)) / vnorm,
        "top_neumann": np.hypot(surf_norm(dzv1.top), surf_norm(dzv2.top)) / vnorm,
    }
    solenoidal = vres["div"] <= tol
    if not solenoidal:
        vband = "not hydrostatically solenoidal"
    elif vres["bottom"] > tol:
        vband = _BAND_LOW
    elif vres["top_neumann"] > tol:
        vband = _BAND_MID
    else:
        vband = _BAND_HIGH

    def scalar_bands(zeta, robin_alpha):
        znorm = max(lp_norm(zeta, 2), 1e-300)
        dz = vertical_derivative(zeta)
        top = dz.top + robin_alpha * zeta.top
        res = {"bottom_neumann": surf_norm(dz.bottom) / znorm,
               "top": surf_norm(top) / znorm}
        band = (_BAND_SCALAR_HIGH
                if res["bottom_neumann"] <= tol and res["top"] <= tol
                else _BAND_SCALAR_LOW)
        return res, band

    tres, tband = scalar_bands(tau, params.alpha)
    sres, sband = scalar_bands(sigma, 0.0)
    return Classification(vres, tres, sres, vband, tband, sband, solenoidal)
