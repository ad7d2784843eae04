"""Deterministic numerics shared by all environments: seeded random streams,
Fourier transforms on small dense grids, periodic interpolation, and tiny
matrix algebra."""

from .rng import SeededRng, Stream
from .grid import ComplexGrid, fft_forward, fft_inverse
from .interp import bilinear_interpolate
from .linalg import invert_small_matrix

__all__ = [
    "SeededRng",
    "Stream",
    "ComplexGrid",
    "fft_forward",
    "fft_inverse",
    "bilinear_interpolate",
    "invert_small_matrix",
]
