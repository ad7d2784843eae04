"""Pydantic request/response schemas for the HTTP service."""

from typing import Any

from pydantic import BaseModel, Field


class EpisodeCreate(BaseModel):
    environment: str
    config: dict = Field(default_factory=dict)
    seed: int
    num_queries: int = 5
    horizon_factor: float = 1.2
    variant: dict | str | None = None
    max_retries: int = 3
    max_turns: int = 1000
    disclose_truth: bool = False


class Envelope(BaseModel):
    type: str
    payload: Any


class MessageIn(BaseModel):
    message: str


class BatchOut(BaseModel):
    episode_id: str
    envelopes: list[Envelope]
    done: bool


class StatusOut(BaseModel):
    episode_id: str
    environment: str
    variant: str
    phase: str
    done: bool
    time: float
    remaining_budget: float
    turns: int


class HealthOut(BaseModel):
    status: str
