"""Guessing-session state machine.

A session reveals a prefix of the sentence and the participant guesses one
character at a time. Every non-repeat guess consumes one unit of budget;
the budget starts at sentence_length - prefix_len. A correct guess emits an
Observation (position, attempts) and advances the cursor. The session
completes when the budget is exhausted or the sentence ends.

Repeat guesses at the same position are rejected without consuming budget:
a repeated symbol carries no information and would distort the attempts
distribution.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .alphabet import Alphabet
from .corpus import SentenceRecord
from .errors import (
    CorruptLog,
    InvalidSymbol,
    RateLimited,
    RepeatGuess,
    SentenceTooShort,
    SessionNotActive,
)

ACTIVE = "active"
COMPLETED = "completed"
ABANDONED = "abandoned"

DEFAULT_MIN_ATTEMPT_INTERVAL = 0.3  # seconds; anti-mash


@dataclass(frozen=True)
class SessionConfig:
    alphabet: Alphabet
    prefix_len: int = 70
    min_attempt_interval: float = DEFAULT_MIN_ATTEMPT_INTERVAL


@dataclass(frozen=True)
class Observation:
    session_id: str
    participant_id: str
    sentence_id: str
    position: int
    attempts: int
    timestamp: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Observation":
        return cls(**{k: d[k] for k in
                      ("session_id", "participant_id", "sentence_id",
                       "position", "attempts", "timestamp")})


@dataclass(frozen=True)
class GuessEvent:
    session_id: str
    position: int
    guessed_symbol: str
    correct: bool
    timestamp: float
    seq: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GuessEvent":
        return cls(**{k: d[k] for k in
                      ("session_id", "position", "guessed_symbol",
                       "correct", "timestamp", "seq")})


@dataclass
class Session:
    id: str
    participant_id: str
    sentence: SentenceRecord
    config: SessionConfig
    cursor: int = 0
    budget_remaining: int = 0
    attempts_on_current: set = field(default_factory=set)
    status: str = ACTIVE
    started_at: float = 0.0
    last_event_at: float = float("-inf")
    next_seq: int = 0

    @property
    def sentence_length(self) -> int:
        return self.sentence.length

    @property
    def prefix(self) -> str:
        return self.sentence.normalized_text[: self.config.prefix_len]

    @property
    def revealed_text(self) -> str:
        """Prefix plus every correctly guessed character. Never more."""
        return self.sentence.normalized_text[: self.cursor]


@dataclass(frozen=True)
class GuessOutcome:
    correct: bool
    revealed_symbol: str | None
    budget_remaining: int
    session_status: str
    position: int
    attempts_so_far: int
    observation: Observation | None
    event: GuessEvent


def start_session(
    participant_id: str,
    sentence: SentenceRecord,
    config: SessionConfig,
    session_id: str,
    now: float = 0.0,
) -> Session:
    if sentence.length <= config.prefix_len:
        raise SentenceTooShort(
            f"sentence length {sentence.length} <= prefix {config.prefix_len}"
        )
    return Session(
        id=session_id,
        participant_id=participant_id,
        sentence=sentence,
        config=config,
        cursor=config.prefix_len,
        budget_remaining=sentence.length - config.prefix_len,
        status=ACTIVE,
        started_at=now,
        last_event_at=float("-inf"),
    )


def submit_guess(session: Session, symbol: str, now: float) -> GuessOutcome:
    """Apply one guess to the session, mutating it in place.

    Raises SessionNotActive, InvalidSymbol, RateLimited or RepeatGuess
    without any state change.
    """
    if session.status != ACTIVE:
        raise SessionNotActive(f"session {session.id} is {session.status}")
    if symbol not in session.config.alphabet:
        raise InvalidSymbol(repr(symbol))
    elapsed = now - session.last_event_at
    if elapsed < session.config.min_attempt_interval:
        raise RateLimited(session.config.min_attempt_interval - elapsed)
    if symbol in session.attempts_on_current:
        raise RepeatGuess(repr(symbol))

    position = session.cursor
    target = session.sentence.normalized_text[position]
    correct = symbol == target
    event = GuessEvent(
        session_id=session.id,
        position=position,
        guessed_symbol=symbol,
        correct=correct,
        timestamp=now,
        seq=session.next_seq,
    )
    session.next_seq += 1
    session.last_event_at = now
    session.budget_remaining -= 1

    observation = None
    if correct:
        observation = Observation(
            session_id=session.id,
            participant_id=session.participant_id,
            sentence_id=session.sentence.id,
            position=position,
            attempts=len(session.attempts_on_current) + 1,
            timestamp=now,
        )
        session.cursor += 1
        session.attempts_on_current = set()
    else:
        session.attempts_on_current.add(symbol)

    if session.budget_remaining == 0 or session.cursor >= session.sentence_length:
        session.status = COMPLETED

    return GuessOutcome(
        correct=correct,
        revealed_symbol=target if correct else None,
        budget_remaining=session.budget_remaining,
        session_status=session.status,
        position=position,
        attempts_so_far=len(session.attempts_on_current) + (1 if correct else 0),
        observation=observation,
        event=event,
    )


def abandon_session(session: Session) -> Session:
    """Mark an active session abandoned. Emitted observations stay valid."""
    if session.status != ACTIVE:
        raise SessionNotActive(f"session {session.id} is {session.status}")
    session.status = ABANDONED
    return session


def derive_observations(events: list[GuessEvent]) -> list[Observation]:
    """Replay a per-session event log into the observations it implies.

    Pure function of the log; must match the online stream. The log must
    be sorted by seq with no duplicates, and all events must belong to one
    session.

    Participant and sentence ids are not carried by guess events, so the
    replayed observations leave them empty; callers with session metadata
    can fill them in.
    """
    observations = []
    wrong_symbols: set[str] = set()
    last_seq = None
    position = None
    for ev in events:
        if last_seq is not None and ev.seq <= last_seq:
            raise CorruptLog(f"non-monotone seq {ev.seq} after {last_seq}")
        last_seq = ev.seq
        if position is None:
            position = ev.position
        if ev.position != position:
            raise CorruptLog(
                f"event at position {ev.position} while position {position} unfinished"
            )
        if ev.guessed_symbol in wrong_symbols:
            raise CorruptLog(f"repeated symbol {ev.guessed_symbol!r} in log")
        if ev.correct:
            observations.append(
                Observation(
                    session_id=ev.session_id,
                    participant_id="",
                    sentence_id="",
                    position=ev.position,
                    attempts=len(wrong_symbols) + 1,
                    timestamp=ev.timestamp,
                )
            )
            wrong_symbols = set()
            position = None
        else:
            wrong_symbols.add(ev.guessed_symbol)
    return observations


def write_observations(observations: list[Observation], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obs in observations:
            fh.write(json.dumps(obs.to_dict(), ensure_ascii=False) + "\n")


def read_observations(path: str | Path) -> list[Observation]:
    with open(path, encoding="utf-8") as fh:
        return [Observation.from_dict(json.loads(line)) for line in fh if line.strip()]
