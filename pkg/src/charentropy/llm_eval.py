"""Bits-per-character evaluation of token-level language models.

A provider returns per-token log-probabilities for a sentence, each token
tagged with its character offset. BPC counts only tokens that start at or
beyond the mask position (default 70, mirroring the visible prefix of the
human experiment) and divides the summed bits by the characters those
tokens cover. Fertility is characters per token over the whole sentence,
masked tokens included.

Log-probabilities arrive with an explicit base tag ("e", "2" or "10") and
are converted to base 2 once at ingestion.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import httpx

from .corpus import SentenceRecord
from .errors import (
    ContextTooLong,
    MalformedResponse,
    MissingDate,
    NoCountedTokens,
    ProviderUnavailable,
    TokenizationGap,
)

_LOG_BASE_FACTORS = {"2": 1.0, "e": 1.0 / math.log(2.0), "10": math.log2(10.0)}

DEFAULT_MASK_FROM = 70


@dataclass(frozen=True)
class TokenLogprob:
    token_text: str
    start_char: int
    logprob_bits: float  # base-2 log-probability, always <= 0

    @classmethod
    def from_tagged(cls, token_text: str, start_char: int, logprob: float, base: str) -> "TokenLogprob":
        try:
            factor = _LOG_BASE_FACTORS[str(base)]
        except KeyError:
            raise MalformedResponse(f"unknown logprob base {base!r}") from None
        if logprob > 0:
            raise MalformedResponse(f"positive logprob {logprob}")
        if start_char < 0:
            raise MalformedResponse(f"negative token offset {start_char}")
        return cls(token_text=token_text, start_char=start_char, logprob_bits=logprob * factor)


@dataclass(frozen=True)
class SentenceScore:
    bits: float
    counted_chars: int
    counted_tokens: int
    total_chars: int
    total_tokens: int


@dataclass(frozen=True)
class LlmEvalResult:
    model_id: str
    bpc: float
    fertility: float
    counted_chars: int
    counted_tokens: int
    sentences: int

    def to_dict(self) -> dict:
        return {
            "model": self.model_id,
            "bpc": self.bpc,
            "fertility": self.fertility,
            "counted_chars": self.counted_chars,
            "counted_tokens": self.counted_tokens,
            "sentences": self.sentences,
        }


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model_id: str
    timeout: float = 30.0
    max_retries: int = 3
    auth_token: str | None = None


def validate_tiling(tokens: list[TokenLogprob], sentence: str) -> None:
    """Token texts, laid end to end at their offsets, must rebuild the sentence."""
    cursor = 0
    for t in tokens:
        if t.start_char != cursor:
            raise TokenizationGap(f"token at {t.start_char}, expected {cursor}")
        if sentence[cursor: cursor + len(t.token_text)] != t.token_text:
            raise TokenizationGap(f"token text mismatch at {cursor}")
        cursor += len(t.token_text)
    if cursor != len(sentence):
        raise TokenizationGap(f"tokens cover {cursor} of {len(sentence)} characters")


def score_sentence(
    tokens: list[TokenLogprob],
    sentence: str,
    mask_from: int = DEFAULT_MASK_FROM,
) -> SentenceScore:
    """Sum bits over tokens starting at or past the mask position.

    A token starting exactly at ``mask_from`` is counted (0-based offsets;
    the first guessed character of the human experiment is position 70).
    """
    validate_tiling(tokens, sentence)
    counted = [t for t in tokens if t.start_char >= mask_from]
    bits = -sum(t.logprob_bits for t in counted)
    return SentenceScore(
        bits=bits,
        counted_chars=sum(len(t.token_text) for t in counted),
        counted_tokens=len(counted),
        total_chars=len(sentence),
        total_tokens=len(tokens),
    )


def corpus_bpc(model_id: str, scores: list[SentenceScore]) -> LlmEvalResult:
    """Aggregate per-sentence scores: bpc = total bits / total counted chars."""
    counted_chars = sum(s.counted_chars for s in scores)
    if counted_chars == 0:
        raise NoCountedTokens("every token was masked")
    total_tokens = sum(s.total_tokens for s in scores)
    return LlmEvalResult(
        model_id=model_id,
        bpc=sum(s.bits for s in scores) / counted_chars,
        fertility=sum(s.total_chars for s in scores) / total_tokens,
        counted_chars=counted_chars,
        counted_tokens=sum(s.counted_tokens for s in scores),
        sentences=len(scores),
    )


def _parse_provider_response(payload: dict, sentence: str) -> list[TokenLogprob]:
    try:
        raw = payload["tokens"]
        tokens = [
            TokenLogprob.from_tagged(t["text"], t["start"], t["logprob"], t["base"])
            for t in raw
        ]
    except (KeyError, TypeError) as exc:
        raise MalformedResponse(str(exc)) from exc
    validate_tiling(tokens, sentence)
    return tokens


def fetch_logprobs(
    sentence: str,
    provider: ProviderConfig,
    sleep=time.sleep,
) -> list[TokenLogprob]:
    """POST {model, text} to the provider; retry transient failures.

    The provider conditions each sentence independently (no cross-sentence
    context).
    """
    headers = {}
    if provider.auth_token:
        headers["Authorization"] = f"Bearer {provider.auth_token}"
    last_error = None
    for attempt in range(provider.max_retries):
        try:
            resp = httpx.post(
                provider.endpoint,
                json={"model": provider.model_id, "text": sentence},
                headers=headers,
                timeout=provider.timeout,
            )
        except httpx.HTTPError as exc:
            last_error = exc
            sleep(min(2.0 ** attempt, 10.0))
            continue
        if resp.status_code == 413:
            raise ContextTooLong(f"{len(sentence)} characters")
        if resp.status_code >= 500:
            last_error = RuntimeError(f"provider returned {resp.status_code}")
            sleep(min(2.0 ** attempt, 10.0))
            continue
        if resp.status_code != 200:
            raise MalformedResponse(f"provider returned {resp.status_code}")
        return _parse_provider_response(resp.json(), sentence)
    raise ProviderUnavailable(str(last_error))


class FileMockProvider:
    """Offline provider backed by a JSON file mapping text -> token list.

    File format: {"<sentence text>": [{"text", "start", "logprob", "base"}, ...]}
    """

    def __init__(self, path: str | Path):
        self._table = json.loads(Path(path).read_text(encoding="utf-8"))

    def fetch(self, sentence: str) -> list[TokenLogprob]:
        if sentence not in self._table:
            raise ProviderUnavailable(f"mock has no entry for {sentence[:40]!r}...")
        return _parse_provider_response({"tokens": self._table[sentence]}, sentence)


def contamination_check(
    sentence: SentenceRecord,
    published_dates: dict[str, date],
    cutoff_date: date,
) -> bool:
    """True iff the source article was published strictly after the cutoff."""
    published = published_dates.get(sentence.source_article)
    if published is None:
        raise MissingDate(sentence.source_article)
    return published > cutoff_date


def evaluate_corpus(
    sentences: list[SentenceRecord],
    model_id: str,
    fetch,
    mask_from: int = DEFAULT_MASK_FROM,
) -> LlmEvalResult:
    """Score every sentence's raw text through ``fetch`` and aggregate.

    Raw text (case and punctuation preserved) is used, unlike the human
    experiment's normalized text.
    """
    scores = [
        score_sentence(fetch(s.raw_text), s.raw_text, mask_from=mask_from)
        for s in sentences
    ]
    return corpus_bpc(model_id, scores)
