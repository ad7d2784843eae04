"""Parsing and validation of raw agent messages.

Every rejection carries a distinct machine-readable code (the exception's
``code`` attribute) so agents and tests can branch without matching prose:
parse, missing_field, unknown_field, empty_selection, invalid_object,
invalid_coordinate, invalid_particle, invalid_quality, invalid_time_delta,
invalid_prediction.  Unknown top-level or item-level fields are rejected
outright; quality strings are case-insensitive.
"""

import json
import math

from ..errors import (
    ConfigurationError,
    EmptySelectionError,
    InvalidCoordinateError,
    InvalidObjectError,
    InvalidParticleError,
    InvalidPredictionError,
    InvalidTimeDeltaError,
    MissingFieldError,
    ParseError,
    UnknownFieldError,
)
from ..protocol.fidelity import Fidelity
from ..protocol.requests import (
    ClassicalRequest,
    FluidRequest,
    PredictionAnswer,
    QuantumRequest,
)


def _load_object(raw: str) -> dict:
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"message is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"message must be a JSON object, got {type(data).__name__}")
    return data


def _reject_unknown(data: dict, allowed: set, where: str) -> None:
    extra = set(data) - allowed
    if extra:
        raise UnknownFieldError(
            f"unknown field(s) in {where}: {', '.join(sorted(extra))}"
        )


def _require(data: dict, field: str, where: str):
    if field not in data:
        raise MissingFieldError(f"missing field '{field}' in {where}")
    return data[field]


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _parse_time_delta(value) -> float:
    if not _is_number(value) or not math.isfinite(value) or value <= 0:
        raise InvalidTimeDeltaError(
            f"time_delta must be a positive finite number, got {value!r}"
        )
    return float(value)


def _parse_quality(value) -> Fidelity:
    return Fidelity.parse(value)


def _parse_prediction_answer(data: dict) -> PredictionAnswer:
    _reject_unknown(data, {"predictions", "law"}, "prediction answer")
    values = data["predictions"]
    if not isinstance(values, list):
        raise InvalidPredictionError(
            f"predictions must be a list of numbers, got {type(values).__name__}"
        )
    for v in values:
        if not _is_number(v) or not math.isfinite(v):
            raise InvalidPredictionError(f"prediction entry {v!r} is not a finite number")
    law = data.get("law")
    if law is not None and not isinstance(law, str):
        raise InvalidPredictionError("law must be a string when present")
    return PredictionAnswer(values=tuple(float(v) for v in values), law=law)


def _parse_classical(data: dict) -> ClassicalRequest:
    _reject_unknown(data, {"selection", "time_delta"}, "action")
    selection = _require(data, "selection", "action")
    time_delta = _parse_time_delta(_require(data, "time_delta", "action"))
    if not isinstance(selection, list):
        raise ParseError(f"selection must be a list, got {type(selection).__name__}")
    if not selection:
        raise EmptySelectionError("empty selection: choose at least one object")
    parsed = []
    for item in selection:
        if not isinstance(item, dict):
            raise ParseError("each selection entry must be an object")
        _reject_unknown(item, {"object_id", "quality"}, "selection entry")
        object_id = _require(item, "object_id", "selection entry")
        if not isinstance(object_id, int) or isinstance(object_id, bool) or object_id < 0:
            raise InvalidObjectError(
                f"object_id must be a non-negative integer, got {object_id!r}"
            )
        quality = _parse_quality(_require(item, "quality", "selection entry"))
        parsed.append((object_id, quality))
    return ClassicalRequest(selection=tuple(parsed), time_delta=time_delta)


def _parse_fluid(data: dict) -> FluidRequest:
    _reject_unknown(data, {"selection", "time_delta"}, "action")
    selection = _require(data, "selection", "action")
    time_delta = _parse_time_delta(_require(data, "time_delta", "action"))
    if not isinstance(selection, list):
        raise ParseError(f"selection must be a list, got {type(selection).__name__}")
    if not selection:
        raise EmptySelectionError("empty selection: choose at least one point")
    parsed = []
    for item in selection:
        if not isinstance(item, dict):
            raise ParseError("each selection entry must be an object")
        _reject_unknown(item, {"x", "y", "quality"}, "selection entry")
        x = _require(item, "x", "selection entry")
        y = _require(item, "y", "selection entry")
        for name, value in (("x", x), ("y", y)):
            if not _is_number(value) or not math.isfinite(value):
                raise InvalidCoordinateError(
                    f"coordinate {name} must be a finite number, got {value!r}"
                )
        quality = _parse_quality(_require(item, "quality", "selection entry"))
        parsed.append((float(x), float(y), quality))
    return FluidRequest(selection=tuple(parsed), time_delta=time_delta)


def _parse_quantum(data: dict) -> QuantumRequest:
    _reject_unknown(data, {"particle", "time_delta", "quality"}, "action")
    particle = _require(data, "particle", "action")
    time_delta = _parse_time_delta(_require(data, "time_delta", "action"))
    quality = _parse_quality(_require(data, "quality", "action"))
    if not isinstance(particle, int) or isinstance(particle, bool) or particle not in (1, 2):
        raise InvalidParticleError(f"particle must be 1 or 2, got {particle!r}")
    return QuantumRequest(particle=particle, fidelity=quality, time_delta=time_delta)


_PARSERS = {
    "classical": _parse_classical,
    "fluid": _parse_fluid,
    "quantum": _parse_quantum,
}


def parse_action(raw: str, kind: str):
    """Parse one agent message into a typed request or prediction answer.

    A message containing a ``predictions`` key is a prediction answer in any
    environment; anything else must match the environment's action schema.
    """
    if kind not in _PARSERS:
        raise ConfigurationError(f"unknown environment kind {kind!r}")
    data = _load_object(raw)
    if "predictions" in data:
        return _parse_prediction_answer(data)
    return _PARSERS[kind](data)
