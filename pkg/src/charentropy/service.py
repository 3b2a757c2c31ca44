"""HTTP facade over the session engine with append-only persistence.

State lives in memory and is backed by an append-only JSON Lines event
log; replaying the log reconstructs the full experiment state, so the
process can be killed between requests without losing anything. Session
assignment outcomes (which sentence a session got) are logged, which keeps
replay deterministic without replaying RNG state.
"""
from __future__ import annotations

import hashlib
import json
import random
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import session as se
from .alphabet import Alphabet, ukrainian
from .corpus import SentenceRecord, read_pool
from .errors import (
    InvalidSymbol,
    PoolExhausted,
    RateLimited,
    RepeatGuess,
    SessionNotActive,
    UnknownParticipant,
    UnknownSession,
)

DEFAULT_SESSION_TTL = 24 * 3600.0


@dataclass
class ServiceConfig:
    corpus_path: str
    log_path: str
    prefix_len: int = 70
    min_attempt_interval: float = se.DEFAULT_MIN_ATTEMPT_INTERVAL
    session_ttl: float = DEFAULT_SESSION_TTL
    export_salt: str = "charentropy"
    assignment_seed: int | None = None
    alphabet: Alphabet = field(default_factory=ukrainian)

    @property
    def session_config(self) -> se.SessionConfig:
        return se.SessionConfig(
            alphabet=self.alphabet,
            prefix_len=self.prefix_len,
            min_attempt_interval=self.min_attempt_interval,
        )


@dataclass
class Participant:
    id: str
    display_name: str | None
    created_at: float
    assigned_sentences: list = field(default_factory=list)


class Store:
    """In-memory experiment state with an append-only event log."""

    def __init__(self, config: ServiceConfig, clock=time.monotonic, idgen=None):
        self.config = config
        self.clock = clock
        self.idgen = idgen or (lambda: secrets.token_hex(8))
        self.pool: list[SentenceRecord] = read_pool(config.corpus_path)
        self.sentences = {s.id: s for s in self.pool}
        self.participants: dict[str, Participant] = {}
        self.sessions: dict[str, se.Session] = {}
        self.observations: list[se.Observation] = []
        self._rng = random.Random(config.assignment_seed)
        self._log_path = Path(config.log_path)
        self._log_fh = None
        if self._log_path.exists():
            self._replay()
        self._log_fh = open(self._log_path, "a", encoding="utf-8")

    # -- persistence ------------------------------------------------------

    def _append(self, record: dict) -> None:
        if self._log_fh is None:
            return  # replaying; the record is already on disk
        self._log_fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        self._log_fh.flush()

    def _replay(self) -> None:
        with open(self._log_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    self._apply(json.loads(line))

    def _apply(self, rec: dict) -> None:
        kind = rec["type"]
        if kind == "register":
            self.participants[rec["participant_id"]] = Participant(
                id=rec["participant_id"],
                display_name=rec.get("display_name"),
                created_at=rec["timestamp"],
            )
        elif kind == "session_start":
            participant = self.participants[rec["participant_id"]]
            sentence = self.sentences[rec["sentence_id"]]
            session = se.start_session(
                participant_id=rec["participant_id"],
                sentence=sentence,
                config=self.config.session_config,
                session_id=rec["session_id"],
                now=rec["timestamp"],
            )
            self.sessions[session.id] = session
            participant.assigned_sentences.append(sentence.id)
        elif kind == "guess":
            session = self.sessions[rec["session_id"]]
            # replay bypasses the rate limit: timestamps are historical
            session.last_event_at = float("-inf")
            outcome = se.submit_guess(session, rec["symbol"], rec["timestamp"])
            session.last_event_at = rec["timestamp"]
            if outcome.observation:
                self.observations.append(outcome.observation)
        elif kind == "abandon":
            se.abandon_session(self.sessions[rec["session_id"]])
        else:
            raise ValueError(f"unknown log record type {kind!r}")

    # -- operations -------------------------------------------------------

    def register(self, display_name: str | None = None) -> Participant:
        now = self.clock()
        pid = self.idgen()
        self._append(
            {"type": "register", "participant_id": pid,
             "display_name": display_name, "timestamp": now}
        )
        self._apply(
            {"type": "register", "participant_id": pid,
             "display_name": display_name, "timestamp": now}
        )
        return self.participants[pid]

    def _assign_sentence(self, participant: Participant) -> SentenceRecord:
        """Uniform without replacement per participant, then with replacement."""
        if not self.pool:
            raise PoolExhausted("sentence pool is empty")
        seen = set(participant.assigned_sentences)
        fresh = [s for s in self.pool if s.id not in seen]
        return self._rng.choice(fresh if fresh else self.pool)

    def start_session(self, participant_id: str) -> se.Session:
        participant = self.participants.get(participant_id)
        if participant is None:
            raise UnknownParticipant(participant_id)
        sentence = self._assign_sentence(participant)
        now = self.clock()
        sid = self.idgen()
        rec = {"type": "session_start", "session_id": sid,
               "participant_id": participant_id,
               "sentence_id": sentence.id, "timestamp": now}
        self._append(rec)
        self._apply(rec)
        return self.sessions[sid]

    def guess(self, session_id: str, symbol: str) -> se.GuessOutcome:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        now = self.clock()
        outcome = se.submit_guess(session, symbol, now)
        self._append({"type": "guess", "session_id": session_id,
                      "symbol": symbol, "timestamp": now})
        if outcome.observation:
            self.observations.append(outcome.observation)
        return outcome

    def abandon(self, session_id: str) -> se.Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        se.abandon_session(session)
        self._append({"type": "abandon", "session_id": session_id,
                      "timestamp": self.clock()})
        return session

    def sweep_abandoned(self) -> int:
        """Auto-abandon sessions idle beyond the TTL; returns how many."""
        now = self.clock()
        swept = 0
        for session in list(self.sessions.values()):
            if session.status != se.ACTIVE:
                continue
            last = max(session.started_at, session.last_event_at)
            if now - last > self.config.session_ttl:
                self.abandon(session.id)
                swept += 1
        return swept

    def stats(self) -> dict:
        statuses = [s.status for s in self.sessions.values()]
        total = sum(s.next_seq for s in self.sessions.values())
        return {
            "sessions_started": len(statuses),
            "sessions_completed": statuses.count(se.COMPLETED),
            "sessions_abandoned": statuses.count(se.ABANDONED),
            "sessions_active": statuses.count(se.ACTIVE),
            "total_guesses": total,
            "correct_guesses": len(self.observations),
            "observations": len(self.observations),
        }

    def _pseudonym(self, participant_id: str) -> str:
        digest = hashlib.sha256(
            (self.config.export_salt + ":" + participant_id).encode()
        ).hexdigest()
        return digest[:16]

    def export_jsonl(self) -> str:
        """Deterministic anonymized dump: one meta line, observations, sessions."""
        lines = [json.dumps({
            "type": "meta",
            "prefix_len": self.config.prefix_len,
            "min_attempt_interval": self.config.min_attempt_interval,
            "session_ttl": self.config.session_ttl,
            "alphabet": "".join(self.config.alphabet.symbols),
        }, ensure_ascii=False)]
        for obs in self.observations:
            d = obs.to_dict()
            d["participant_id"] = self._pseudonym(d["participant_id"])
            lines.append(json.dumps({"type": "observation", **d}, ensure_ascii=False))
        for sid in sorted(self.sessions):
            s = self.sessions[sid]
            lines.append(json.dumps({
                "type": "session",
                "session_id": s.id,
                "participant_id": self._pseudonym(s.participant_id),
                "sentence_id": s.sentence.id,
                "status": s.status,
                "total_guesses": s.next_seq,
                "correct_guesses": s.cursor - s.config.prefix_len,
            }, ensure_ascii=False))
        return "\n".join(lines) + "\n"

    def close(self) -> None:
        if self._log_fh:
            self._log_fh.close()
            self._log_fh = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message})


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="charentropy")
    app.state.store = store

    @app.post("/api/participants")
    async def register(request: Request):
        body = await _json_body(request)
        participant = store.register(body.get("display_name"))
        return {"participant_id": participant.id}

    @app.post("/api/sessions")
    async def start_session(request: Request):
        body = await _json_body(request)
        try:
            session = store.start_session(body.get("participant_id", ""))
        except UnknownParticipant:
            return _error(404, "unknown_participant", "participant not registered")
        except PoolExhausted:
            return _error(409, "pool_exhausted", "no sentences available")
        return {
            "session_id": session.id,
            "prefix": session.prefix,
            "budget": session.budget_remaining,
            "sentence_length": session.sentence_length,
        }

    @app.post("/api/sessions/{session_id}/guesses")
    async def guess(session_id: str, request: Request):
        body = await _json_body(request)
        try:
            outcome = store.guess(session_id, body.get("symbol", ""))
        except UnknownSession:
            return _error(404, "unknown_session", "no such session")
        except SessionNotActive:
            return _error(409, "session_not_active", "session already ended")
        except (InvalidSymbol, RepeatGuess) as exc:
            code = "invalid_symbol" if isinstance(exc, InvalidSymbol) else "repeat_guess"
            return _error(422, code, str(exc))
        except RateLimited as exc:
            resp = _error(429, "rate_limited", str(exc))
            resp.headers["Retry-After"] = f"{exc.retry_after:.3f}"
            return resp
        return {
            "correct": outcome.correct,
            "revealed_symbol": outcome.revealed_symbol,
            "budget_remaining": outcome.budget_remaining,
            "session_status": outcome.session_status,
            "position": outcome.position,
            "attempts_so_far": outcome.attempts_so_far,
        }

    @app.post("/api/sessions/{session_id}/abandon")
    async def abandon(session_id: str):
        try:
            session = store.abandon(session_id)
        except UnknownSession:
            return _error(404, "unknown_session", "no such session")
        except SessionNotActive:
            return _error(409, "session_not_active", "session already ended")
        return {"session_id": session.id, "status": session.status}

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown_session", "no such session")
        return {
            "session_id": session.id,
            "status": session.status,
            "revealed_text": session.revealed_text,
            "budget_remaining": session.budget_remaining,
            "wrong_guesses_current": sorted(session.attempts_on_current),
            "sentence_length": session.sentence_length,
        }

    @app.get("/api/stats")
    async def stats():
        store.sweep_abandoned()
        return store.stats()

    @app.get("/api/export")
    async def export(format: str = "jsonl"):
        if format != "jsonl":
            return _error(422, "bad_format", f"unsupported format {format!r}")
        return PlainTextResponse(store.export_jsonl(),
                                 media_type="application/jsonl")

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        return {}
    return body if isinstance(body, dict) else {}
