"""Fidelity tiers and the cost/noise trade-off they define.

Every observation names a tier.  Higher tiers cost more budget and add less
Gaussian noise to the returned values.  The default schedule is
cost {low: 2, medium: 5, high: 10} with noise sigma {0.1, 0.01, 0.001}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ConfigurationError, InvalidQualityError
from ..numerics.rng import SeededRng


class Fidelity(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"

    @classmethod
    def parse(cls, text: str) -> "Fidelity":
        """Case-insensitive lookup; raises InvalidQualityError on anything else."""
        if not isinstance(text, str):
            raise InvalidQualityError(f"quality must be a string, got {type(text).__name__}")
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise InvalidQualityError(
                f"unknown quality {text!r}; expected one of low, medium, high"
            ) from None


DEFAULT_COSTS = {Fidelity.LOW: 2.0, Fidelity.MEDIUM: 5.0, Fidelity.HIGH: 10.0}
DEFAULT_NOISE = {Fidelity.LOW: 0.1, Fidelity.MEDIUM: 0.01, Fidelity.HIGH: 0.001}


@dataclass
class CostModel:
    """Per-tier observation cost and noise level.

    Costs must be strictly positive and strictly increasing with fidelity;
    noise levels must be non-negative and strictly decreasing.
    """

    costs: dict = field(default_factory=lambda: dict(DEFAULT_COSTS))
    noise: dict = field(default_factory=lambda: dict(DEFAULT_NOISE))

    def __post_init__(self):
        for table, name in ((self.costs, "costs"), (self.noise, "noise")):
            missing = [f for f in Fidelity if f not in table]
            if missing:
                raise ConfigurationError(f"cost model {name} missing tiers: {missing}")
        lo, med, hi = (self.costs[f] for f in (Fidelity.LOW, Fidelity.MEDIUM, Fidelity.HIGH))
        if not (0 < lo < med < hi):
            raise ConfigurationError(
                f"costs must be positive and increase with fidelity, got {lo}, {med}, {hi}"
            )
        nlo, nmed, nhi = (self.noise[f] for f in (Fidelity.LOW, Fidelity.MEDIUM, Fidelity.HIGH))
        if not (nlo > nmed > nhi >= 0):
            raise ConfigurationError(
                f"noise must be non-negative and decrease with fidelity, got {nlo}, {nmed}, {nhi}"
            )

    def cost_of(self, fidelity: Fidelity) -> float:
        return float(self.costs[fidelity])

    def noise_sigma(self, fidelity: Fidelity) -> float:
        return float(self.noise[fidelity])

    @property
    def min_cost(self) -> float:
        return min(self.costs.values())


def apply_observation_noise(
    values: np.ndarray, fidelity: Fidelity, cost_model: CostModel, rng: SeededRng
) -> np.ndarray:
    """Corrupt true values with i.i.d. Gaussian noise at the tier's sigma."""
    values = np.asarray(values, dtype=float)
    sigma = cost_model.noise_sigma(fidelity)
    if sigma == 0:
        return values.copy()
    return values + rng.normal(0.0, sigma, size=values.shape)
