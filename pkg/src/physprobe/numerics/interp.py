"""Bilinear interpolation on periodic 2D grids."""

from __future__ import annotations

import numpy as np


def bilinear_interpolate(
    values: np.ndarray, x: float, y: float, length_x: float, length_y: float
) -> float:
    """Sample a periodic field at an off-grid point.

    `values` is indexed [i, j] where i runs along x and j along y; the grid
    covers [0, length_x) x [0, length_y) with nodes at multiples of the
    spacing.  Coordinates wrap periodically.
    """
    nx, ny = values.shape
    hx = length_x / nx
    hy = length_y / ny

    fx = (x / hx) % nx
    fy = (y / hy) % ny
    i0 = int(np.floor(fx)) % nx
    j0 = int(np.floor(fy)) % ny
    i1 = (i0 + 1) % nx
    j1 = (j0 + 1) % ny
    tx = fx - np.floor(fx)
    ty = fy - np.floor(fy)

    v00 = values[i0, j0]
    v10 = values[i1, j0]
    v01 = values[i0, j1]
    v11 = values[i1, j1]
    return float(
        v00 * (1 - tx) * (1 - ty)
        + v10 * tx * (1 - ty)
        + v01 * (1 - tx) * ty
        + v11 * tx * ty
    )
