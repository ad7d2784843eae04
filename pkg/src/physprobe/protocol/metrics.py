"""Prediction error metrics.

nrmse normalizes root-mean-square position error by the domain diagonal so
scores are comparable across box sizes; l2_error is the plain Euclidean
distance used for field and density predictions.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ArgumentError


def nrmse(predicted: np.ndarray, actual: np.ndarray, domain_diagonal: float) -> float:
    """Root-mean-square error over all components, divided by the diagonal."""
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape:
        raise ArgumentError(
            f"shape mismatch: predicted {predicted.shape} vs actual {actual.shape}"
        )
    if domain_diagonal <= 0:
        raise ArgumentError(f"domain_diagonal must be > 0, got {domain_diagonal}")
    return float(np.sqrt(np.mean((predicted - actual) ** 2)) / domain_diagonal)


def l2_error(predicted: np.ndarray, actual: np.ndarray) -> float:
    """Euclidean norm of the prediction error."""
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape:
        raise ArgumentError(
            f"shape mismatch: predicted {predicted.shape} vs actual {actual.shape}"
        )
    return float(np.sqrt(np.sum((predicted - actual) ** 2)))


def domain_diagonal(lo: tuple, hi: tuple) -> float:
    """Diagonal length of an axis-aligned box."""
    return math.sqrt(sum((h - l) ** 2 for l, h in zip(lo, hi)))
