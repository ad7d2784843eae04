"""HTTP face of the episode harness.

Each episode is an isolated session addressed by id; message delivery is
serialized per episode with a lock, matching the wire protocol's strict
alternation.  The agent-visible content is identical to the socket server:
the same envelope batches, the same raw-JSON action messages.
"""

import threading
import uuid

from fastapi import FastAPI, HTTPException

from ..errors import PhysprobeError
from ..harness.episode import EpisodeConfig, EpisodeSession
from .models import (
    BatchOut,
    Envelope,
    EpisodeCreate,
    HealthOut,
    MessageIn,
    StatusOut,
)


class _Store:
    def __init__(self):
        self.sessions: dict = {}
        self.lock = threading.Lock()

    def add(self, session: EpisodeSession) -> str:
        episode_id = uuid.uuid4().hex[:12]
        with self.lock:
            self.sessions[episode_id] = (session, threading.Lock())
        return episode_id

    def get(self, episode_id: str):
        with self.lock:
            entry = self.sessions.get(episode_id)
        if entry is None:
            raise HTTPException(status_code=404, detail="unknown episode id")
        return entry

    def drop(self, episode_id: str) -> None:
        with self.lock:
            if episode_id not in self.sessions:
                raise HTTPException(status_code=404, detail="unknown episode id")
            del self.sessions[episode_id]


def _batch_out(episode_id: str, session: EpisodeSession, envelopes: list) -> BatchOut:
    return BatchOut(
        episode_id=episode_id,
        envelopes=[Envelope(**envelope) for envelope in envelopes],
        done=session.done,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="physprobe", version="1.0")
    store = _Store()

    @app.get("/healthz", response_model=HealthOut)
    def healthz():
        return HealthOut(status="ok")

    @app.post("/episodes", response_model=BatchOut)
    def create_episode(body: EpisodeCreate):
        try:
            episode = EpisodeConfig(
                environment=body.environment,
                config=body.config,
                seed=body.seed,
                num_queries=body.num_queries,
                horizon_factor=body.horizon_factor,
                variant=body.variant,
                max_retries=body.max_retries,
                max_turns=body.max_turns,
                disclose_truth=body.disclose_truth,
            )
            session = EpisodeSession(episode)
        except (PhysprobeError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        episode_id = store.add(session)
        envelopes = session.start()
        return _batch_out(episode_id, session, envelopes)

    def _deliver(episode_id: str, body: MessageIn) -> BatchOut:
        session, lock = store.get(episode_id)
        with lock:
            if session.done:
                raise HTTPException(
                    status_code=409, detail="episode already finished"
                )
            envelopes = session.handle(body.message)
        return _batch_out(episode_id, session, envelopes)

    @app.post("/episodes/{episode_id}/messages", response_model=BatchOut)
    def deliver_message(episode_id: str, body: MessageIn):
        return _deliver(episode_id, body)

    # phase-named aliases for clients that separate the two flows
    @app.post("/episodes/{episode_id}/action", response_model=BatchOut)
    def deliver_action(episode_id: str, body: MessageIn):
        return _deliver(episode_id, body)

    @app.post("/episodes/{episode_id}/predictions", response_model=BatchOut)
    def deliver_prediction(episode_id: str, body: MessageIn):
        return _deliver(episode_id, body)

    @app.get("/episodes/{episode_id}", response_model=StatusOut)
    def episode_status(episode_id: str):
        session, _ = store.get(episode_id)
        return StatusOut(
            episode_id=episode_id,
            environment=session.kind,
            variant=session.episode.variant.kind,
            phase=session.phase,
            done=session.done,
            time=session.clock.time,
            remaining_budget=session.ledger.remaining,
            turns=session.turns,
        )

    @app.get("/episodes/{episode_id}/record")
    def episode_record(episode_id: str):
        session, _ = store.get(episode_id)
        if not session.done:
            raise HTTPException(
                status_code=409,
                detail=f"episode still in the {session.phase} phase",
            )
        return session.record.to_dict()

    @app.delete("/episodes/{episode_id}")
    def drop_episode(episode_id: str):
        store.drop(episode_id)
        return {"deleted": episode_id}

    return app


app = create_app()
