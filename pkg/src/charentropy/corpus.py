"""Corpus preparation: raw articles to a normalized, length-filtered sentence pool.

Pipeline, in order: split into sentences on ".!?", reject sentences with
Latin letters or digits, mask everything outside the alphabet to whitespace
(uppercasing first), collapse whitespace runs, then keep sentences whose
normalized length is within [min_len, max_len] inclusive.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, asdict
from datetime import date
from pathlib import Path

from .alphabet import Alphabet, WHITESPACE
from .errors import EmptyPool

_TERMINATORS = re.compile(r"[.!?]")
_FOREIGN = re.compile(r"[a-zA-Z0-9]")


@dataclass(frozen=True)
class RawArticle:
    id: str
    text: str
    published_date: date


@dataclass(frozen=True)
class SentenceRecord:
    id: str
    normalized_text: str
    raw_text: str
    length: int
    source_article: str

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SentenceRecord":
        return cls(**d)


def split_sentences(text: str) -> list[str]:
    """Split article text on '.', '!', '?'.

    Terminators are dropped. A trailing fragment without a terminator is
    kept. Empty/whitespace-only fragments are dropped.
    """
    parts = _TERMINATORS.split(text)
    return [p.strip() for p in parts if p.strip()]


def reject_foreign(sentence: str) -> bool:
    """True iff the sentence contains no ASCII Latin letters and no digits."""
    return _FOREIGN.search(sentence) is None


def normalize(sentence: str, alphabet: Alphabet) -> str:
    """Uppercase, mask non-alphabet characters to whitespace, collapse runs, strip.

    May return the empty string; the caller filters by length.
    """
    out = []
    for ch in sentence.upper():
        out.append(ch if ch in alphabet else WHITESPACE)
    collapsed = re.sub(re.escape(WHITESPACE) + "+", WHITESPACE, "".join(out))
    return collapsed.strip(WHITESPACE)


def build_pool(
    articles: list[RawArticle],
    alphabet: Alphabet,
    min_len: int = 120,
    max_len: int = 200,
) -> list[SentenceRecord]:
    """Run the full pipeline over articles, in article order.

    Raises EmptyPool if nothing survives. Length bounds are inclusive.
    """
    if min_len > max_len:
        raise ValueError("min_len must not exceed max_len")
    records = []
    for article in articles:
        for raw in split_sentences(article.text):
            if not reject_foreign(raw):
                continue
            norm = normalize(raw, alphabet)
            if not (min_len <= len(norm) <= max_len):
                continue
            records.append(
                SentenceRecord(
                    id=f"{article.id}:{len(records):04d}",
                    normalized_text=norm,
                    raw_text=raw,
                    length=len(norm),
                    source_article=article.id,
                )
            )
    if not records:
        raise EmptyPool("no sentences survived filtering")
    return records


def load_articles(directory: str | Path, manifest_path: str | Path) -> list[RawArticle]:
    """Read UTF-8 article files listed in a JSON manifest.

    Manifest maps filename -> {"id": str, "published_date": "YYYY-MM-DD"}.
    Articles are returned in manifest order.
    """
    directory = Path(directory)
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    articles = []
    for filename, meta in manifest.items():
        text = (directory / filename).read_text(encoding="utf-8")
        articles.append(
            RawArticle(
                id=meta["id"],
                text=text,
                published_date=date.fromisoformat(meta["published_date"]),
            )
        )
    return articles


def write_pool(records: list[SentenceRecord], path: str | Path) -> None:
    """Write the sentence pool as JSON Lines, one record per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")


def read_pool(path: str | Path) -> list[SentenceRecord]:
    with open(path, encoding="utf-8") as fh:
        return [SentenceRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
