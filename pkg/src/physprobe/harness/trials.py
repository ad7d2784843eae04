"""Multi-episode runners: in-context series and parameter inference.

An in-context series replays the same world (same seed, so bit-identical
initial conditions) across several episodes while the observation-noise and
query streams carry forward, so later episodes see fresh noise and freshly
sampled query times.  Between episodes the agent is rebuilt from its factory
(a context reset) and handed a deterministic JSON summary of everything that
happened so far as part of the opening briefing.
"""

import json

from ..errors import ConfigurationError
from .episode import EpisodeConfig, EpisodeRecord, EpisodeSession, drive_session


def build_summary(records: list) -> str:
    """Serialize prior episodes (observations, predictions, scores) as JSON."""
    entries = []
    for index, record in enumerate(records):
        observations = [
            {
                "time": entry["time"],
                "cost": entry["cost"],
                "data": entry["response_payload"].get("data"),
            }
            for entry in record.transcript
            if entry["response_type"] == "observation"
        ]
        entries.append(
            {
                "episode": index,
                "score": record.score,
                "observations": observations,
                "predictions": record.predictions,
                "law": record.law,
            }
        )
    return json.dumps(entries, sort_keys=True)


def _fresh_agent(agent_or_factory):
    if hasattr(agent_or_factory, "respond") and not isinstance(agent_or_factory, type):
        return agent_or_factory
    return agent_or_factory()


def run_trials(episode: EpisodeConfig, agent_or_factory) -> list:
    """Run an episode series and return one record per episode.

    For the icl variant this runs ``num_episodes`` episodes as described in
    the module docstring.  For any other variant it runs a single episode
    (quantum wavefunction trials happen inside the session), so the result is
    always a list of records.
    """
    if episode.variant.kind != "icl":
        session = EpisodeSession(episode)
        return [drive_session(session, _fresh_agent(agent_or_factory))]

    records: list = []
    carry = None
    for _ in range(episode.variant.num_episodes):
        summary = build_summary(records) if records else None
        session = EpisodeSession(episode, opening_summary=summary, rng_carry=carry)
        agent = _fresh_agent(agent_or_factory)
        records.append(drive_session(session, agent))
        carry = {"noise": session.env.rng_noise, "query": session.env.rng_query}
    return records


def run_parameter_inference(episode: EpisodeConfig, agent):
    """Run a parameter-estimation episode.

    Returns ``(estimate, absolute_error, record)``; the estimate and error
    are None when the agent forfeited the final query.
    """
    if episode.variant.kind != "parameter_inference":
        raise ConfigurationError(
            "run_parameter_inference requires the parameter_inference variant"
        )
    session = EpisodeSession(episode)
    record = drive_session(session, agent)
    estimate = record.parameter_estimate
    if estimate is None:
        return None, None, record
    error = abs(estimate - record.parameter_true)
    return estimate, error, record


def write_records(path, records: list) -> None:
    """Append-style JSONL dump, one episode record per line."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), sort_keys=True))
            handle.write("\n")


def read_records(path) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(EpisodeRecord.from_dict(json.loads(line)))
    return records
