"""Binary snapshot I/O.

Layout: magic "PRIMEQ01"; nx, ny, nz as 8-byte little-endian unsigned
integers; h, alpha, beta_tau, beta_sigma, t as 8-byte little-endian floats;
then the arrays v1, v2, tau, sigma, each traversed k-outer, j-middle, i-inner
(z slowest, x fastest) as 8-byte little-endian floats. Round-trips are
bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import Grid, HVectorField, PhysParams, ScalarField

MAGIC = b"PRIMEQ01"
_HEADER = struct.Struct("<QQQddddd")


def _packed(values: np.ndarray) -> bytes:
    # fields are stored (i, j, k); k-outer order is the transpose
    return np.ascontiguousarray(values.transpose(2, 1, 0)).astype(
        "<f8", copy=False).tobytes()


def write_snapshot(path, state, params: PhysParams):
    g = state.v.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(g.nx, g.ny, g.nz, g.h, params.alpha,
                              params.beta_tau, params.beta_sigma, state.t))
        for arr in (state.v.v1.values, state.v.v2.values,
                    state.tau.values, state.sigma.values):
            fh.write(_packed(arr))


def read_snapshot(path):
    """Returns (state, params); pi_s is not stored and comes back zero."""
    from .grid import SurfaceScalarField
    from .solver import State

    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"bad snapshot magic {magic!r}")
        nx, ny, nz, h, alpha, b_tau, b_sigma, t = _HEADER.unpack(
            fh.read(_HEADER.size))
        grid = Grid(int(nx), int(ny), int(nz), h)
        params = PhysParams(alpha, b_tau, b_sigma)
        count = grid.nx * grid.ny * (grid.nz + 1)
        arrays = []
        for _ in range(4):
            flat = np.fromfile(fh, dtype="<f8", count=count)
            if flat.size != count:
                raise ValueError("truncated snapshot")
            arrays.append(np.ascontiguousarray(
                flat.reshape(grid.nz + 1, grid.ny, grid.nx).transpose(2, 1, 0)))
        if fh.read(1):
            raise ValueError("trailing bytes in snapshot")
    v = HVectorField(ScalarField(grid, arrays[0]), ScalarField(grid, arrays[1]))
    tau = ScalarField(grid, arrays[2])
    sigma = ScalarField(grid, arrays[3])
    state = State(t, v, tau, sigma, SurfaceScalarField.zeros(grid))
    return state, params
