"""Common environment interface consumed by the episode harness.

An adapter owns the simulation state, three independent random streams
(initialization, observation noise, query sampling), and the cost model.
The harness owns the budget ledger, the clock, and the phase state machine;
it calls into the adapter to step, measure, pose queries, and score.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field as dataclass_field
from typing import ClassVar

import numpy as np

from ..numerics.rng import SeededRng, Stream
from ..protocol.clock import Clock
from ..protocol.fidelity import CostModel
from ..protocol.ledger import BudgetLedger
from ..protocol.requests import MeasurementRequest


@dataclass
class QuerySpec:
    """One prediction query: what to ask and how many values come back.

    ``meta`` carries the domain-specific target (probe points, region) in
    parsed form so truth evaluation does not re-read the wire payload.
    """

    time: float
    payload: dict
    arity: int
    meta: dict = dataclass_field(default_factory=dict)


class EnvironmentAdapter(abc.ABC):
    kind: ClassVar[str] = ""

    def __init__(self, config, seed: int, cost_model: CostModel | None = None):
        self.config = config
        self.seed = int(seed)
        self.cost_model = cost_model if cost_model is not None else CostModel()
        self.rng_init = SeededRng(self.seed, Stream.INIT)
        self.rng_noise = SeededRng(self.seed, Stream.NOISE)
        self.rng_query = SeededRng(self.seed, Stream.QUERY)
        self.reset()

    @property
    def dt(self) -> float:
        return self.config.dt

    @property
    def t_max(self) -> float:
        return self.config.t_max

    @property
    def budget(self) -> float:
        return self.config.budget

    def fresh_clock(self) -> Clock:
        return Clock(self.config.dt, self.config.t_max)

    def fresh_ledger(self) -> BudgetLedger:
        return BudgetLedger(self.config.budget)

    def begin_prediction_phase(self) -> None:
        """Hook run once when measurement ends; default is a no-op."""

    def validate_request(self, request: MeasurementRequest) -> None:
        """Reject semantically invalid requests before any charge is taken.

        Runs after grammar parsing but before the clock advances or the
        ledger is touched, so a bad object id costs the agent nothing.
        """

    @abc.abstractmethod
    def reset(self) -> None:
        """Build the initial simulation state from the init stream."""

    @abc.abstractmethod
    def step_many(self, steps: int, first_step_index: int = 0) -> None:
        """Advance the simulation by an exact step count."""

    @abc.abstractmethod
    def measurement_cost(self, request: MeasurementRequest) -> float:
        """Budget charge for a request, before executing it."""

    @abc.abstractmethod
    def measure(self, request: MeasurementRequest, time: float) -> dict:
        """Execute a measurement and return its formatted observation payload."""

    @abc.abstractmethod
    def make_query(self, time: float) -> QuerySpec:
        """Draw a prediction query for the given future time."""

    @abc.abstractmethod
    def truth_values(self, query: QuerySpec) -> np.ndarray:
        """Ground-truth answer; the simulation must already sit at query.time."""

    @abc.abstractmethod
    def score_error(self, predicted: np.ndarray, truth: np.ndarray) -> float:
        """Domain error metric for one query."""

    @abc.abstractmethod
    def briefing_params(self) -> dict:
        """Values interpolated into the briefing template."""
