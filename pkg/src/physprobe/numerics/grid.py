"""Uniform periodic grids and discrete Fourier transforms.

Convention: forward transform is unnormalized (a DC-constant field c on N
points transforms to c*N in mode zero), inverse carries the 1/N factor per
axis, so inverse(forward(x)) == x.  scipy.fft is used as the backend; it is
substantially faster than numpy for the 4D joint grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft

from ..errors import ArgumentError


@dataclass
class ComplexGrid:
    """Values on a uniform periodic grid with per-axis physical lengths."""

    dims: tuple[int, ...]
    axis_lengths: tuple[float, ...]
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.axis_lengths = tuple(float(L) for L in self.axis_lengths)
        if len(self.dims) != len(self.axis_lengths):
            raise ArgumentError("dims and axis_lengths rank mismatch")
        if any(n < 1 for n in self.dims):
            raise ArgumentError("grid dims must be positive")
        if any(L <= 0 for L in self.axis_lengths):
            raise ArgumentError("axis lengths must be positive")
        if self.values is None:
            self.values = np.zeros(self.dims, dtype=np.complex128)
        else:
            self.values = np.asarray(self.values, dtype=np.complex128)
            if self.values.shape != self.dims:
                raise ArgumentError(
                    f"values shape {self.values.shape} != dims {self.dims}"
                )

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.axis_lengths, self.dims))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        """Physical coordinates of grid points along one axis, starting at 0."""
        n = self.dims[axis]
        return np.arange(n) * (self.axis_lengths[axis] / n)

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers 2*pi*fftfreq for one axis."""
        n = self.dims[axis]
        return 2.0 * np.pi * np.fft.fftfreq(n, d=self.axis_lengths[axis] / n)


def fft_forward(values: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT over all axes."""
    return scipy.fft.fftn(np.asarray(values, dtype=np.complex128), norm="backward")


def fft_inverse(values: np.ndarray) -> np.ndarray:
    """Inverse DFT carrying the 1/N normalization."""
    return scipy.fft.ifftn(np.asarray(values, dtype=np.complex128), norm="backward")


def wavenumber_mesh(dims: Sequence[int], lengths: Sequence[float]) -> list[np.ndarray]:
    """Broadcastable angular-wavenumber arrays, one per axis."""
    out = []
    rank = len(dims)
    for ax, (n, L) in enumerate(zip(dims, lengths)):
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
        shape = [1] * rank
        shape[ax] = n
        out.append(k.reshape(shape))
    return out
