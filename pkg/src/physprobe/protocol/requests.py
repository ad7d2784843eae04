"""Typed measurement requests and prediction answers.

These are the parsed, validated forms of the JSON messages agents send.
Parsing lives in the harness; environments consume only these types.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .fidelity import Fidelity


@dataclass(frozen=True)
class ClassicalRequest:
    """Observe a set of bodies by id, then advance time."""

    selection: tuple  # of (object_id, Fidelity)
    time_delta: float


@dataclass(frozen=True)
class FluidRequest:
    """Probe vorticity at a set of points, then advance time."""

    selection: tuple  # of (x, y, Fidelity)
    time_delta: float


@dataclass(frozen=True)
class QuantumRequest:
    """Measure (and collapse) one particle, then advance time."""

    particle: int  # 1 or 2
    fidelity: Fidelity
    time_delta: float


MeasurementRequest = Union[ClassicalRequest, FluidRequest, QuantumRequest]


@dataclass(frozen=True)
class PredictionAnswer:
    values: tuple  # of float, arity fixed by the query
    law: str | None = None  # optional free-text law description riding along


@dataclass(frozen=True)
class LawAnswer:
    """Free-text description of the inferred dynamics; logged, not graded."""

    text: str
