"""Small dense matrix inversion for the per-body inertia tensors."""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, SingularMatrixError

# determinant magnitudes below this are treated as singular
_DET_FLOOR = 1e-14


def invert_small_matrix(m: np.ndarray) -> np.ndarray:
    """Invert a 2x2 or 3x3 matrix via the adjugate formula.

    Raises SingularMatrixError when |det| < 1e-14.  Only the sizes the
    simulations actually use are supported; anything larger should go through
    a general solver instead.
    """
    m = np.asarray(m, dtype=float)
    if m.shape == (2, 2):
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) < _DET_FLOOR:
            raise SingularMatrixError(f"2x2 matrix is singular (det={det!r})")
        return np.array(
            [[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=float
        ) / det
    if m.shape == (3, 3):
        c00 = m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
        c01 = m[1, 2] * m[2, 0] - m[1, 0] * m[2, 2]
        c02 = m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]
        det = m[0, 0] * c00 + m[0, 1] * c01 + m[0, 2] * c02
        if abs(det) < _DET_FLOOR:
            raise SingularMatrixError(f"3x3 matrix is singular (det={det!r})")
        adj = np.array(
            [
                [c00, m[0, 2] * m[2, 1] - m[0, 1] * m[2, 2], m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]],
                [c01, m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0], m[0, 2] * m[1, 0] - m[0, 0] * m[1, 2]],
                [c02, m[0, 1] * m[2, 0] - m[0, 0] * m[2, 1], m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]],
            ],
            dtype=float,
        )
        return adj / det
    raise ArgumentError(f"unsupported matrix shape {m.shape}; expected 2x2 or 3x3")
