"""Guessable symbol sets.

An alphabet is an ordered list of distinct symbols: the letters of the
target language plus exactly one whitespace symbol. Its size K fixes the
maximum attainable entropy log2(K) per character.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

WHITESPACE = " "

# 33 letters, canonical dictionary order.
UKRAINIAN_LETTERS = "АБВГҐДЕЄЖЗИІЇЙКЛМНОПРСТУФХЦЧШЩЬЮЯ"


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of guessable symbols (letters + one whitespace)."""

    symbols: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be unique")
        if self.symbols.count(WHITESPACE) != 1:
            raise ValueError("alphabet must contain the whitespace symbol exactly once")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def max_entropy(self) -> float:
        """log2(K) bits, the entropy of a uniform symbol distribution."""
        return math.log2(self.size)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def to_dict(self) -> dict:
        return {"symbols": "".join(self.symbols)}

    @classmethod
    def from_dict(cls, d: dict) -> "Alphabet":
        return cls(tuple(d["symbols"]))


def ukrainian() -> Alphabet:
    """The default alphabet: 33 Ukrainian letters plus whitespace (K = 34)."""
    return Alphabet(tuple(UKRAINIAN_LETTERS) + (WHITESPACE,))
