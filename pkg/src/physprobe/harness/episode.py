"""Episode orchestration: the measurement/prediction state machine.

An :class:`EpisodeSession` is a pull-based state machine: :meth:`start`
returns the opening envelope batch and :meth:`handle` consumes one raw agent
message and returns the next batch.  The last envelope of a batch is the one
awaiting a response, except ``result`` which terminates the episode.  The
socket server, the HTTP service, and in-process agents all drive the same
machine, which is what makes replays bitwise.

Budget semantics follow the ledger: an action the agent cannot afford is
rejected (budget untouched, re-prompt); the measurement phase ends on its own
as soon as no single cheapest observation fits the remaining budget, or the
clock reaches the horizon.  Malformed messages are re-prompted with a coded
error at most ``max_retries`` times per turn, after which the turn is skipped
without charge (measurement) or scored as the zero-vector forfeit
(prediction).
"""

import json
from dataclasses import asdict, dataclass, field as dataclass_field

import numpy as np

from ..envs import ENVIRONMENT_KINDS, make_environment
from ..errors import (
    ConfigurationError,
    InvalidPredictionError,
    ProtocolError,
    TransportError,
)
from ..protocol.fidelity import CostModel
from ..protocol.requests import PredictionAnswer
from ..protocol.sampling import sample_query_times
from .actions import parse_action
from .briefings import parameter_inference_addendum, render_briefing
from .render import render_classical

BUDGET_REJECTION = (
    "Your choice of objects to observe has exceeded your budget."
    "Please choose a different set of objects."
)

VARIANT_KINDS = ("standard", "visual", "icl", "parameter_inference")

MEASUREMENT = "measurement"
PREDICTION = "prediction"
DONE = "done"

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Variant:
    kind: str = "standard"
    num_episodes: int = 1  # icl: episodes in the series
    target: str | None = None  # parameter_inference: symbol to estimate

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ConfigurationError(f"unknown variant kind {self.kind!r}")
        if self.kind == "icl" and self.num_episodes < 1:
            raise ConfigurationError("icl variant needs num_episodes >= 1")
        if self.kind == "parameter_inference" and self.target is None:
            object.__setattr__(self, "target", "kappa")

    @classmethod
    def from_dict(cls, data) -> "Variant":
        if data is None:
            return cls()
        if isinstance(data, str):
            return cls(kind=data)
        return cls(**data)


@dataclass
class EpisodeConfig:
    environment: str
    config: object  # the environment's config dataclass
    seed: int
    num_queries: int = 5
    horizon_factor: float = 1.2
    variant: Variant = dataclass_field(default_factory=Variant)
    max_retries: int = 3
    max_turns: int = 1000
    # test mode: prediction queries carry their own truth so client
    # test suites can score a known-perfect answer
    disclose_truth: bool = False
    cost_model: CostModel | None = None

    def __post_init__(self):
        if self.environment not in ENVIRONMENT_KINDS:
            raise ConfigurationError(
                f"unknown environment kind {self.environment!r}"
            )
        if self.num_queries < 1:
            raise ConfigurationError("num_queries must be >= 1")
        if isinstance(self.config, dict):
            self.config = ENVIRONMENT_KINDS[self.environment][0](**self.config)
        if isinstance(self.variant, (dict, str)) or self.variant is None:
            self.variant = Variant.from_dict(self.variant)
        if self.variant.kind == "parameter_inference" and self.environment != "classical":
            raise ConfigurationError(
                "parameter inference runs on the classical environment only"
            )
        if self.variant.kind == "visual" and self.environment != "classical":
            raise ConfigurationError(
                "the visual variant runs on the classical environment only"
            )

    def to_dict(self) -> dict:
        return {
            "environment": self.environment,
            "config": asdict(self.config),
            "seed": self.seed,
            "num_queries": self.num_queries,
            "horizon_factor": self.horizon_factor,
            "variant": asdict(self.variant),
            "max_retries": self.max_retries,
            "max_turns": self.max_turns,
            "disclose_truth": self.disclose_truth,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeConfig":
        known = {
            "environment",
            "config",
            "seed",
            "num_queries",
            "horizon_factor",
            "variant",
            "max_retries",
            "max_turns",
            "disclose_truth",
        }
        extra = set(data) - known
        if extra:
            raise ConfigurationError(
                f"unknown episode config field(s): {', '.join(sorted(extra))}"
            )
        if "seed" not in data:
            raise ConfigurationError("episode config requires an explicit seed")
        return cls(**data)


@dataclass
class EpisodeRecord:
    environment: str
    seed: int
    config: dict
    variant: dict
    budget_total: float
    transcript: list
    predictions: list
    score: float | None
    law: str | None = None
    aborted: str | None = None
    parameter_true: float | None = None
    parameter_estimate: float | None = None
    schema: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeRecord":
        return cls(**data)


def _envelope(type_: str, payload) -> dict:
    return {"type": type_, "payload": payload}


class EpisodeSession:
    """Single-owner episode state machine; see module docstring."""

    def __init__(self, episode: EpisodeConfig, opening_summary: str | None = None,
                 rng_carry: dict | None = None):
        self.episode = episode
        self.kind = episode.environment
        self.env = make_environment(
            episode.environment, episode.config, episode.seed,
            cost_model=episode.cost_model,
        )
        if rng_carry:
            # in-context series carry the noise and query streams forward so
            # later episodes see fresh noise and freshly sampled queries while
            # the initial conditions (init stream) repeat bitwise
            self.env.rng_noise = rng_carry["noise"]
            self.env.rng_query = rng_carry["query"]
        self.clock = self.env.fresh_clock()
        self.ledger = self.env.fresh_ledger()
        self.opening_summary = opening_summary

        self.is_quantum = self.kind == "quantum"
        self.num_trials = getattr(self.env.config, "num_trials", 1) if self.is_quantum else 1
        self.max_obs_per_trial = (
            self.env.config.max_observations_per_trial if self.is_quantum else None
        )
        self.budget_total = self.env.budget * self.num_trials

        self.phase = MEASUREMENT
        self.retries = 0
        self.turns = 0
        self.observations_this_trial = 0
        self.transcript: list = []
        self.predictions: list = []
        self.law: str | None = None
        self.aborted: str | None = None
        self.parameter_estimate: float | None = None

        self.query_times: list = []
        self.query_index = 0
        self.pending_query = None  # (QuerySpec, truth ndarray)
        self.prediction_cursor = 0  # step index during the prediction phase
        self.done = False
        self._record: EpisodeRecord | None = None

    # -- envelope builders ------------------------------------------------

    def _budget_line(self) -> str:
        return f"You have {self.ledger.remaining} units of budget left."

    def _observation_lines(self, observation: dict) -> list:
        return [
            f"The observation for time {self.clock.time} is the following:",
            json.dumps(observation),
            self._budget_line(),
        ]

    def _log(self, agent_message, envelope: dict, cost: float = 0.0) -> None:
        self.transcript.append(
            {
                "agent": agent_message,
                "response_type": envelope["type"],
                "response_payload": envelope["payload"],
                "cost": cost,
                "time": self.clock.time,
            }
        )

    def _briefing_envelope(self) -> dict:
        params = self.env.briefing_params()
        text = render_briefing(self.kind, params)
        if self.episode.variant.kind == "parameter_inference":
            text = text + "\n" + parameter_inference_addendum()
        messages = [text]
        if self.opening_summary is not None:
            messages.append("Summary of your previous attempts:")
            messages.append(self.opening_summary)
        if self.kind == "classical":
            messages.append("The observation for time 0.0 is the following:")
            messages.append(json.dumps(params["initial_observation"]))
        messages.append(self._budget_line())
        payload = {
            "kind": self.kind,
            "variant": self.episode.variant.kind,
            "messages": messages,
            "parameters": params,
        }
        return _envelope("briefing", payload)

    def _error_envelope(self, code: str, messages: list) -> dict:
        return _envelope("error", {"code": code, "messages": messages})

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> list:
        envelope = self._briefing_envelope()
        self._log(None, envelope)
        return [envelope]

    def abort(self, reason: str) -> list:
        self.aborted = reason
        return [self._finish()]

    def handle(self, raw: str) -> list:
        if self.done:
            raise ProtocolError("episode already finished")
        self.turns += 1
        if self.turns > self.episode.max_turns:
            return self.abort("turn limit exceeded")
        if self.phase == MEASUREMENT:
            return self._handle_measurement(raw)
        return self._handle_prediction(raw)

    # -- measurement phase ---------------------------------------------------

    def _handle_measurement(self, raw: str) -> list:
        try:
            parsed = parse_action(raw, self.kind)
            if isinstance(parsed, PredictionAnswer):
                raise ProtocolError(
                    "prediction answers are not accepted during the "
                    "measurement phase"
                )
            self.env.validate_request(parsed)
        except ProtocolError as exc:
            return self._measurement_rejection(raw, exc)

        cost = self.env.measurement_cost(parsed)
        if not self.ledger.can_afford(cost):
            envelope = self._error_envelope(
                "insufficient_budget", [BUDGET_REJECTION]
            )
            self._log(raw, envelope)
            return [envelope]

        step_before = self.clock.step_count
        granted = self.clock.advance(parsed.time_delta)
        self.ledger.charge(cost, self.clock.time, label=f"turn {self.turns}")
        self.env.step_many(granted, first_step_index=step_before)
        observation = self.env.measure(parsed, self.clock.time)
        self.retries = 0
        self.observations_this_trial += 1

        payload = {"time": self.clock.time, "remaining": self.ledger.remaining}
        if self.episode.variant.kind == "visual":
            image = render_classical(
                self.env.state.positions,
                self.env.state.radii,
                self.env.config.box_lo,
                self.env.config.box_hi,
            )
            payload["image_png"] = image.hex()
            payload["messages"] = [
                f"The observation for time {self.clock.time} is the attached "
                "rendered frame (PNG bytes, hex-encoded in image_png).",
                self._budget_line(),
            ]
        else:
            payload["data"] = observation
            payload["messages"] = self._observation_lines(observation)

        envelopes = [_envelope("observation", payload)]
        self._log(raw, envelopes[0], cost=cost)
        self._after_observation(envelopes, payload)
        return envelopes

    def _measurement_rejection(self, raw: str, exc: ProtocolError) -> list:
        self.retries += 1
        if self.retries >= self.episode.max_retries:
            self.retries = 0
            envelope = self._error_envelope(
                exc.code,
                [
                    f"{exc.message}",
                    "Turn skipped after repeated malformed messages; no "
                    "charge was applied.",
                ],
            )
        else:
            envelope = self._error_envelope(exc.code, [exc.message])
        self._log(raw, envelope)
        return [envelope]

    def _after_observation(self, envelopes: list, payload: dict) -> None:
        exhausted = (
            not self.ledger.can_afford(self.env.cost_model.min_cost)
            or self.clock.exhausted
        )
        at_cap = (
            self.max_obs_per_trial is not None
            and self.observations_this_trial >= self.max_obs_per_trial
        )
        if not (exhausted or at_cap):
            return
        if self.is_quantum and self.env.trial_index + 1 < self.num_trials:
            trial = self.env.reset_trial()
            self.ledger = self.env.fresh_ledger()
            self.clock = self.env.fresh_clock()
            self.observations_this_trial = 0
            payload["messages"].append(
                f"The system has been reset to its initial state. You are now "
                f"on trial {trial + 1} of {self.num_trials} with a fresh "
                f"budget of {self.ledger.remaining} units."
            )
            payload["trial"] = trial
            return
        self._enter_prediction_phase(envelopes)

    # -- prediction phase ------------------------------------------------------

    def _enter_prediction_phase(self, envelopes: list) -> None:
        self.phase = PREDICTION
        self.retries = 0
        self.env.begin_prediction_phase()
        if self.is_quantum:
            self.prediction_cursor = 0
        else:
            self.prediction_cursor = self.clock.step_count
        if self.episode.variant.kind == "parameter_inference":
            envelopes.append(self._parameter_query_envelope())
            return
        self.query_times = sample_query_times(
            self.env.rng_query,
            self.env.t_max,
            self.env.dt,
            self.episode.num_queries,
            self.episode.horizon_factor,
        )
        envelopes.append(self._issue_query())

    def _parameter_query_envelope(self) -> dict:
        symbol = self.episode.variant.target
        payload = {
            "index": 0,
            "count": 1,
            "query": {"target": "parameter", "symbol": symbol},
            "messages": [
                f"Final query: estimate the scalar parameter {symbol} "
                "governing this system. Reply with "
                '{"predictions": [your_estimate]}.'
            ],
        }
        envelope = _envelope("prediction_query", payload)
        self._log(None, envelope)
        return envelope

    def _issue_query(self) -> dict:
        index = self.query_index
        time = self.query_times[index]
        target_step = int(round(time / self.env.dt))
        self.env.step_many(
            target_step - self.prediction_cursor,
            first_step_index=self.prediction_cursor,
        )
        self.prediction_cursor = target_step
        query = self.env.make_query(time)
        truth = self.env.truth_values(query)
        self.pending_query = (query, truth)
        payload = {
            "index": index,
            "count": len(self.query_times),
            "query": query.payload,
            "messages": [
                f"Prediction query {index + 1} of {len(self.query_times)}: "
                + self._query_prose(query)
                + ' Reply with {"predictions": [...]} containing '
                f"{query.arity} number(s)."
            ],
        }
        if self.episode.disclose_truth:
            payload["truth"] = [float(v) for v in truth]
        envelope = _envelope("prediction_query", payload)
        self._log(None, envelope)
        return envelope

    def _query_prose(self, query) -> str:
        if self.kind == "classical":
            n = self.env.config.n_particles
            return (
                f"predict the positions of all {n} objects at time "
                f"{query.time}, flattened object by object."
            )
        if self.kind == "fluid":
            return (
                f"predict the vorticity at each of the listed points at time "
                f"{query.time}, one value per point in order."
            )
        region = query.meta["region"]
        return (
            f"predict the probability that particle {query.meta['particle']} "
            f"lies inside x in [{region[0]:.5f}, {region[1]:.5f}], "
            f"y in [{region[2]:.5f}, {region[3]:.5f}] at time {query.time}."
        )

    def _handle_prediction(self, raw: str) -> list:
        if self.episode.variant.kind == "parameter_inference":
            return self._handle_parameter_answer(raw)
        query, truth = self.pending_query
        try:
            parsed = parse_action(raw, self.kind)
            if not isinstance(parsed, PredictionAnswer):
                raise ProtocolError(
                    "only prediction answers are accepted during the "
                    "prediction phase"
                )
            if len(parsed.values) != query.arity:
                raise InvalidPredictionError(
                    f"expected {query.arity} prediction value(s), "
                    f"got {len(parsed.values)}"
                )
        except ProtocolError as exc:
            self.retries += 1
            if self.retries < self.episode.max_retries:
                envelope = self._error_envelope(exc.code, [exc.message])
                self._log(raw, envelope)
                return [envelope]
            return self._score_forfeit(raw, exc)

        self.retries = 0
        if parsed.law is not None:
            self.law = parsed.law
        answer = np.asarray(parsed.values, dtype=np.float64)
        error = self.env.score_error(answer, truth)
        self.predictions.append(
            {
                "query": query.payload,
                "answer": [float(v) for v in parsed.values],
                "truth": [float(v) for v in truth],
                "error": float(error),
                "forfeited": False,
            }
        )
        # tag the raw onto the envelope this turn produces, which only exists
        # after the next query (or the result) has been logged
        envelopes = self._next_query_or_finish()
        self.transcript[-1]["agent"] = raw
        return envelopes

    def _score_forfeit(self, raw: str, exc: ProtocolError) -> list:
        # unanswerable after retries: score the zero vector so the episode
        # still produces a full set of per-query errors
        self.retries = 0
        query, truth = self.pending_query
        zero = np.zeros(query.arity)
        error = self.env.score_error(zero, truth)
        self.predictions.append(
            {
                "query": query.payload,
                "answer": None,
                "truth": [float(v) for v in truth],
                "error": float(error),
                "forfeited": True,
            }
        )
        envelopes = self._next_query_or_finish()
        self.transcript[-1]["agent"] = raw
        envelopes[0]["payload"].setdefault("messages", []).insert(
            0,
            f"Query {self.query_index} forfeited after repeated malformed "
            f"answers ({exc.code}); it was scored as the zero vector.",
        )
        return envelopes

    def _next_query_or_finish(self) -> list:
        self.query_index += 1
        if self.query_index < len(self.query_times):
            return [self._issue_query()]
        return [self._finish()]

    def _handle_parameter_answer(self, raw: str) -> list:
        try:
            parsed = parse_action(raw, self.kind)
            if not isinstance(parsed, PredictionAnswer) or len(parsed.values) != 1:
                raise InvalidPredictionError(
                    "reply with exactly one numeric estimate in predictions"
                )
        except ProtocolError as exc:
            self.retries += 1
            if self.retries < self.episode.max_retries:
                envelope = self._error_envelope(exc.code, [exc.message])
                self._log(raw, envelope)
                return [envelope]
            # forfeit: the estimate is recorded as missing
            self.parameter_estimate = None
            envelope = self._finish()
            self.transcript[-1]["agent"] = raw
            return [envelope]
        self.parameter_estimate = float(parsed.values[0])
        if parsed.law is not None:
            self.law = parsed.law
        envelope = self._finish()
        self.transcript[-1]["agent"] = raw
        return [envelope]

    # -- completion -------------------------------------------------------------

    def _finish(self) -> dict:
        self.phase = DONE
        self.done = True
        score: float | None
        parameter_true = None
        if self.episode.variant.kind == "parameter_inference":
            parameter_true = float(self.env.config.kappa)
            if self.parameter_estimate is None:
                score = None
            else:
                score = abs(self.parameter_estimate - parameter_true)
        elif self.predictions:
            score = float(np.mean([p["error"] for p in self.predictions]))
        else:
            score = None
        self._record = EpisodeRecord(
            environment=self.kind,
            seed=self.episode.seed,
            config=self.episode.to_dict(),
            variant=asdict(self.episode.variant),
            budget_total=float(self.budget_total),
            transcript=self.transcript,
            predictions=self.predictions,
            score=score,
            law=self.law,
            aborted=self.aborted,
            parameter_true=parameter_true,
            parameter_estimate=self.parameter_estimate,
        )
        payload = {
            "score": score,
            "num_predictions": len(self.predictions),
            "aborted": self.aborted,
            "messages": [
                "The episode is complete."
                if self.aborted is None
                else f"The episode was aborted: {self.aborted}."
            ],
        }
        if score is not None:
            payload["messages"].append(f"Your mean prediction error is {score}.")
        envelope = _envelope("result", payload)
        self._log(None, envelope)
        return envelope

    @property
    def record(self) -> EpisodeRecord:
        if self._record is None:
            raise ProtocolError("episode still in progress; no record yet")
        return self._record


def drive_session(session: EpisodeSession, agent) -> EpisodeRecord:
    """Pump envelopes between a started-or-fresh session and an agent.

    ``agent`` exposes ``respond(envelopes: list) -> str``; it is called for
    every batch whose last envelope awaits a response.  A raised
    :class:`TransportError` aborts the episode with a partial record.
    """
    envelopes = session.start()
    while not session.done:
        try:
            reply = agent.respond(envelopes)
        except TransportError as exc:
            session.abort(f"transport failure: {exc}")
            break
        if reply is None:
            session.abort("agent returned no reply")
            break
        envelopes = session.handle(reply)
    return session.record


def run_episode(episode: EpisodeConfig, agent, opening_summary: str | None = None,
                rng_carry: dict | None = None) -> EpisodeRecord:
    """Drive one episode against an in-process agent."""
    session = EpisodeSession(episode, opening_summary=opening_summary,
                             rng_carry=rng_carry)
    return drive_session(session, agent)


class ReplayAgent:
    """Feeds the agent messages stored in a transcript back verbatim."""

    def __init__(self, transcript: list):
        self.messages = [
            entry["agent"] for entry in transcript if entry["agent"] is not None
        ]
        self.cursor = 0

    def respond(self, envelopes: list) -> str:
        if self.cursor >= len(self.messages):
            raise TransportError("transcript exhausted during replay")
        message = self.messages[self.cursor]
        self.cursor += 1
        return message


def replay_episode(record: EpisodeRecord, rng_carry: dict | None = None):
    """Re-run a recorded episode; returns (new record, list of mismatches).

    Mismatches compare each transcript response payload against the recorded
    one via canonical JSON, so a clean replay means bitwise-identical
    environment behaviour.
    """
    episode = EpisodeConfig.from_dict(record.config)
    agent = ReplayAgent(record.transcript)
    summary = None
    for entry in record.transcript:
        if entry["response_type"] == "briefing":
            messages = entry["response_payload"]["messages"]
            if "Summary of your previous attempts:" in messages:
                summary = messages[messages.index("Summary of your previous attempts:") + 1]
    fresh = run_episode(episode, agent, opening_summary=summary, rng_carry=rng_carry)
    mismatches = []
    for index, (old, new) in enumerate(zip(record.transcript, fresh.transcript)):
        if json.dumps(old["response_payload"], sort_keys=True) != json.dumps(
            new["response_payload"], sort_keys=True
        ):
            mismatches.append(index)
    if len(record.transcript) != len(fresh.transcript):
        mismatches.append(min(len(record.transcript), len(fresh.transcript)))
    return fresh, mismatches
