"""Episode harness: briefings, action grammar, session state machine."""

from .actions import parse_action
from .briefings import render_briefing, strategy_prompt, system_prompt
from .episode import (
    BUDGET_REJECTION,
    EpisodeConfig,
    EpisodeRecord,
    EpisodeSession,
    ReplayAgent,
    Variant,
    replay_episode,
    run_episode,
)
from .render import render_classical, render_fluid, render_quantum

__all__ = [
    "BUDGET_REJECTION",
    "EpisodeConfig",
    "EpisodeRecord",
    "EpisodeSession",
    "ReplayAgent",
    "Variant",
    "parse_action",
    "render_briefing",
    "render_classical",
    "render_fluid",
    "render_quantum",
    "replay_episode",
    "run_episode",
    "strategy_prompt",
    "system_prompt",
]
