"""Episode clock counted in integrator steps.

Time is always step_count * dt, never accumulated float additions, so two
episodes that take the same actions land on bit-identical timestamps.  The
horizon comparison happens in step space: requests are granted while
step_count < max_steps and truncated at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ArgumentError, TimeLimitExceeded


@dataclass
class Clock:
    dt: float
    t_max: float
    step_count: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ArgumentError(f"dt must be > 0, got {self.dt}")
        if self.t_max <= 0:
            raise ArgumentError(f"t_max must be > 0, got {self.t_max}")
        self.max_steps = int(round(self.t_max / self.dt))

    @property
    def time(self) -> float:
        return self.step_count * self.dt

    @property
    def exhausted(self) -> bool:
        return self.step_count >= self.max_steps

    def steps_for(self, time_delta: float) -> int:
        """Convert a requested time advance to a step count (at least 1)."""
        if not math.isfinite(time_delta) or time_delta <= 0:
            raise ArgumentError(f"time_delta must be a positive number, got {time_delta}")
        return max(1, int(math.floor(time_delta / self.dt + 0.5)))

    def advance(self, time_delta: float) -> int:
        """Consume a time advance, truncating at the horizon.

        Returns the number of steps actually granted.  Raises
        TimeLimitExceeded if the clock is already at the horizon.
        """
        if self.exhausted:
            raise TimeLimitExceeded(
                f"episode time limit reached at t={self.time}"
            )
        steps = self.steps_for(time_delta)
        granted = min(steps, self.max_steps - self.step_count)
        self.step_count += granted
        return granted
