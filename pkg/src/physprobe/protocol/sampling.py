"""Prediction query sampling.

Queries land strictly beyond the measurement horizon, uniform on
(t_max, horizon_factor * t_max], snapped to integrator steps so the oracle
trajectory passes through each query time exactly.
"""

from __future__ import annotations

from ..errors import ArgumentError
from ..numerics.rng import SeededRng


def sample_query_times(
    rng: SeededRng,
    t_max: float,
    dt: float,
    num_queries: int,
    horizon_factor: float = 1.2,
) -> list[float]:
    """Draw future timestamps, sorted ascending, each a multiple of dt."""
    if num_queries < 1:
        raise ArgumentError(f"num_queries must be >= 1, got {num_queries}")
    if horizon_factor <= 1.0:
        raise ArgumentError(f"horizon_factor must exceed 1, got {horizon_factor}")
    lo_step = int(round(t_max / dt))
    hi_step = int(round(horizon_factor * t_max / dt))
    if hi_step <= lo_step:
        raise ArgumentError("query window is empty; increase horizon_factor or t_max")
    steps = sorted(int(rng.integers(lo_step + 1, hi_step + 1)) for _ in range(num_queries))
    return [s * dt for s in steps]
