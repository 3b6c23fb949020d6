"""Analytic profiles and random field generators used by the verification
suites: boundary-compatible eigenprofiles, random smooth states, and rough
data with equal energy per eigenvalue octave for smoothing-rate probes.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, HVectorField, PhysParams, ScalarField


def robin_mu(alpha: float, h: float) -> float:
    """Root of mu * tan(mu h) = alpha in (0, pi/2h), by bisection.

    mu^2 is the smallest eigenvalue of -d_zz with the Robin condition at the
    surface and Neumann at the bottom; serves as the continuum oracle for the
    temperature operator.
    """
    lo, hi = 1e-12, np.pi / (2 * h) - 1e-12
    f = lambda m: m * np.tan(m * h) - alpha
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def velocity_eigenprofile(grid: Grid) -> HVectorField:
    """Lowest continuum Stokes-type vertical mode: cos(pi z / 2h) carried by a
    solenoidal horizontal profile. Satisfies v = 0 at the bottom and
    d_z v = 0 at the surface."""
    h = grid.h
    return HVectorField.from_functions(
        grid,
        lambda X, Y, Z: np.sin(2 * np.pi * Y) * np.cos(np.pi * Z / (2 * h)),
        lambda X, Y, Z: 0.0 * X)


def temperature_eigenprofile(grid: Grid, params: PhysParams) -> ScalarField:
    """cos(mu (z+h)) cos(2 pi x): Neumann at the bottom, Robin at the surface."""
    mu = robin_mu(params.alpha, grid.h)
    return ScalarField.from_function(
        grid, lambda X, Y, Z: np.cos(mu * (Z + grid.h)) * np.cos(2 * np.pi * X))


def salinity_eigenprofile(grid: Grid, mode: int = 1) -> ScalarField:
    """cos(m pi (z+h)/h) cos(2 pi y): Neumann at both boundaries."""
    h = grid.h
    return ScalarField.from_function(
        grid, lambda X, Y, Z: np.cos(mode * np.pi * (Z + h) / h) * np.cos(2 * np.pi * Y))


def _random_trig(grid: Grid, rng: np.random.Generator, amplitude: float,
                 kmax: int, zshape) -> np.ndarray:
    X, Y, Z = grid.meshgrid()
    out = np.zeros_like(X)
    nterms = 6
    for _ in range(nterms):
        k1 = rng.integers(-kmax, kmax + 1)
        k2 = rng.integers(-kmax, kmax + 1)
        phase = rng.uniform(0, 2 * np.pi)
        a = rng.normal() / nterms
        out += a * np.cos(2 * np.pi * (k1 * X + k2 * Y) + phase) * zshape(Z, rng)
    return amplitude * out


def random_smooth_scalar(grid: Grid, rng: np.random.Generator,
                         amplitude: float = 1.0, kmax: int = 3) -> ScalarField:
    h = grid.h

    def zshape(Z, rng_):
        m = rng_.integers(0, 3)
        return np.cos(m * np.pi * (Z + h) / h)

    return ScalarField(grid, _random_trig(grid, rng, amplitude, kmax, zshape))


def random_smooth_velocity(grid: Grid, rng: np.random.Generator,
                           amplitude: float = 1.0, kmax: int = 3,
                           bc_compatible: bool = False) -> HVectorField:
    """Random smooth horizontal velocity; not projected. With bc_compatible,
    vertical profiles vanish at the bottom and have zero slope at the top."""
    h = grid.h

    def zshape(Z, rng_):
        if bc_compatible:
            m = rng_.integers(0, 3)
            return np.cos((2 * m + 1) * np.pi * Z / (2 * h))
        m = rng_.integers(0, 3)
        return np.cos(m * np.pi * (Z + h) / h)

    return HVectorField(
        ScalarField(grid, _random_trig(grid, rng, amplitude, kmax, zshape)),
        ScalarField(grid, _random_trig(grid, rng, amplitude, kmax, zshape)))


def random_smooth_state(grid: Grid, rng: np.random.Generator,
                        amplitude: float = 1.0):
    v = random_smooth_velocity(grid, rng, amplitude)
    tau = random_smooth_scalar(grid, rng, amplitude)
    sigma = random_smooth_scalar(grid, rng, amplitude)
    return v, tau, sigma


def octave_flat_scalar(cache, rng: np.random.Generator,
                       lam_min: float = 1.0) -> ScalarField:
    """Rough data with equal energy per octave of the total eigenvalue.

    White noise on a 3D grid has spectral measure ~ lambda^{1/2} d lambda and
    smooths at the wrong rate; data at the L2 roughness edge (measure
    ~ d lambda / lambda) realizes the operator-norm smoothing exponent. The
    construction scales Hermitian-symmetric modal noise so every octave
    [2^j, 2^{j+1}) of lambda_total carries unit energy.
    """
    g = cache.grid
    noise = rng.standard_normal((g.nx, g.ny, g.nz + 1))
    fhat = np.fft.fft2(noise, axes=(0, 1)) / (g.nx * g.ny)
    c = cache.op.to_modal(fhat)
    lam = cache.lam_total
    c = _flatten_octaves(c, lam, lam_min)
    fhat = cache.op.from_modal(c)
    vals = np.fft.ifft2(fhat * (g.nx * g.ny), axes=(0, 1)).real
    return ScalarField(g, vals)


def _flatten_octaves(c: np.ndarray, lam: np.ndarray, lam_min: float) -> np.ndarray:
    """Shape coefficients to the spectral measure ~ d lambda / lambda.

    Eigenvalues are clustered into near-degenerate atoms; each atom receives
    total energy equal to the log-lambda gap it covers (trapezoid tiling of
    the log measure). This stays faithful to 1/lambda even where the discrete
    spectrum has gaps wider than any fixed binning.
    """
    out = np.zeros_like(c)
    # structural zeros (masked modes) must not claim measure weight
    active = (lam >= lam_min) & (np.abs(c) > 0)
    if not np.any(active):
        return out
    loglam = np.log(lam[active])
    clusters, inverse = np.unique(np.round(loglam, 2), return_inverse=True)
    if clusters.size == 1:
        weights = np.array([1.0])
    else:
        gaps = np.diff(clusters)
        weights = np.empty_like(clusters)
        weights[0] = gaps[0] / 2
        weights[-1] = gaps[-1] / 2
        weights[1:-1] = (gaps[:-1] + gaps[1:]) / 2
    energy = np.bincount(inverse, np.abs(c[active]) ** 2,
                         minlength=clusters.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(energy > 0, np.sqrt(weights / np.maximum(energy, 1e-300)), 0.0)
    out[active] = c[active] * scale[inverse]
    return out


def octave_flat_velocity(cache, rng: np.random.Generator,
                         lam_min: float = 1.0) -> HVectorField:
    """Rough velocity data built directly in the par/perp modal split of the
    hydrostatic Stokes cache, so the constrained spectrum is excited with
    equal energy per octave."""
    from .dynamics import _mode_geometry
    from .spectral import laplace_symbol

    g = cache.grid
    lap = laplace_symbol(g)
    noise1 = np.fft.fft2(rng.standard_normal((g.nx, g.ny, g.nz + 1)),
                         axes=(0, 1)) / (g.nx * g.ny)
    noise2 = np.fft.fft2(rng.standard_normal((g.nx, g.ny, g.nz + 1)),
                         axes=(0, 1)) / (g.nx * g.ny)
    k1, k2, zero = _mode_geometry(g)

    apar = k1 * noise1 + k2 * noise2
    w = g.zweights
    apar = apar - (apar @ w)[:, :, None] / g.h
    aperp = -k2 * noise1 + k1 * noise2

    cpar = apar @ cache._c_analysis
    lam_par = np.broadcast_to(lap[:, :, None] + cache.constrained_eigenvalues,
                              cpar.shape)
    cperp = cache.op.to_modal(aperp)
    lam_perp = np.broadcast_to(cache.lam_total, cperp.shape)
    # constraint-free modes (horizontal mean, Nyquist corners) carry the low
    # end of the spectrum and must participate, or the measure has a gap
    cm1 = cache.op.to_modal(np.where(zero, noise1, 0.0))
    cm2 = cache.op.to_modal(np.where(zero, noise2, 0.0))

    blocks = [cpar, cperp, cm1, cm2]
    lams = [lam_par, lam_perp, lam_perp, lam_perp]
    flat_c = np.concatenate([b.ravel() for b in blocks])
    flat_lam = np.concatenate([l.ravel() for l in lams])
    flat_c = _flatten_octaves(flat_c, flat_lam, lam_min)
    sizes = np.cumsum([b.size for b in blocks])[:-1]
    cpar, cperp, cm1, cm2 = [part.reshape(b.shape) for part, b in
                             zip(np.split(flat_c, sizes), blocks)]

    apar = cpar @ cache.constrained_eigenvectors.T
    aperp = cache.op.from_modal(cperp)
    p1 = cache.op.from_modal(cm1)
    p2 = cache.op.from_modal(cm2)

    f1 = np.where(zero, p1, k1 * apar - k2 * aperp)
    f2 = np.where(zero, p2, k2 * apar + k1 * aperp)
    n = g.nx * g.ny
    return HVectorField(
        ScalarField(g, np.fft.ifft2(f1 * n, axes=(0, 1)).real),
        ScalarField(g, np.fft.ifft2(f2 * n, axes=(0, 1)).real))
