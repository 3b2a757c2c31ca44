"""Entropy bound estimation from guess observations.

Given q_i, the fraction of characters guessed correctly on the i-th try
(i = 1..K), the true per-character entropy H is bracketed by

    H_upper = -sum_i q_i log2 q_i      (entropy of the guess-count distribution)
    H_lower =  sum_i q_i log2 i        (entropy of the least surprising
                                        distribution consistent with q)

Per-position bounds are pooled over a position window with weights
w_n = N_n / sum_k N_k, N_n the observation count at position n.

The formulas are evaluated on the raw empirical q without re-sorting; a
non-monotone q (which can make H_lower exceed H_upper) is flagged, not
repaired.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoData
from .session import Observation


@dataclass(frozen=True)
class QDistribution:
    """Guess-count distribution: q[i-1] = fraction guessed on the i-th try."""

    q: np.ndarray
    n_obs: int

    @property
    def is_rank_monotone(self) -> bool:
        """True if q is non-increasing in the try index (ideal-guesser shape)."""
        return bool(np.all(np.diff(self.q) <= 0))


@dataclass(frozen=True)
class EntropyBounds:
    h_lower: float
    h_upper: float
    n_obs: int


@dataclass(frozen=True)
class PositionWindow:
    n1: int = 70
    n2: int = 110

    def __post_init__(self):
        if self.n1 > self.n2:
            raise ValueError("window start must not exceed window end")

    def __contains__(self, position: int) -> bool:
        return self.n1 <= position <= self.n2


@dataclass(frozen=True)
class PooledEstimate:
    h_upper: float
    h_lower: float
    per_position: dict = field(default_factory=dict)  # position -> (EntropyBounds, N_n)
    weights: dict = field(default_factory=dict)       # position -> w_n
    redundancy: float = 0.0
    n_obs: int = 0


def q_distribution(observations: list[Observation], position: int, k: int) -> QDistribution:
    """Empirical q at one position: counts of attempts=i divided by n_obs."""
    attempts = [o.attempts for o in observations if o.position == position]
    return _q_from_attempts(attempts, k)


def _q_from_attempts(attempts: list[int], k: int) -> QDistribution:
    if not attempts:
        raise NoData("no observations at this position")
    counts = np.bincount(attempts, minlength=k + 1)[1: k + 1]
    if counts.sum() != len(attempts):
        raise ValueError("attempts outside [1, K]")
    return QDistribution(q=counts / len(attempts), n_obs=len(attempts))


def upper_bound(q: QDistribution) -> float:
    """H_upper = -sum q_i log2 q_i, with 0 log 0 = 0."""
    p = q.q[q.q > 0]
    return float(-np.sum(p * np.log2(p)))


def lower_bound(q: QDistribution) -> float:
    """H_lower = sum q_i log2 i (1-indexed tries)."""
    i = np.arange(1, len(q.q) + 1)
    return float(np.sum(q.q * np.log2(i)))


def bounds(q: QDistribution) -> EntropyBounds:
    return EntropyBounds(h_lower=lower_bound(q), h_upper=upper_bound(q), n_obs=q.n_obs)


def per_position_bounds(
    observations: list[Observation],
    window: PositionWindow,
    k: int,
) -> dict[int, tuple[EntropyBounds, int]]:
    """Bounds for every in-window position that has at least one observation."""
    attempts_by_pos: dict[int, list[int]] = {}
    for o in observations:
        if o.position in window:
            attempts_by_pos.setdefault(o.position, []).append(o.attempts)
    if not attempts_by_pos:
        raise NoData("no observations inside the position window")
    return {
        pos: (bounds(_q_from_attempts(att, k)), len(att))
        for pos, att in sorted(attempts_by_pos.items())
    }


def pooled_estimate(
    observations: list[Observation],
    window: PositionWindow,
    k: int,
) -> PooledEstimate:
    """Observation-count-weighted mean of per-position bounds over the window."""
    per_pos = per_position_bounds(observations, window, k)
    total = sum(n for _, n in per_pos.values())
    weights = {pos: n / total for pos, (_, n) in per_pos.items()}
    h_upper = sum(weights[pos] * b.h_upper for pos, (b, _) in per_pos.items())
    h_lower = sum(weights[pos] * b.h_lower for pos, (b, _) in per_pos.items())
    return PooledEstimate(
        h_upper=h_upper,
        h_lower=h_lower,
        per_position=per_pos,
        weights=weights,
        redundancy=1.0 - h_upper / np.log2(k),
        n_obs=total,
    )


def session_score(observations: list[Observation], k: int) -> float:
    """A session's own upper bound, merging its observations across positions.

    Used as the ranking key for bottom-trimming; lower is better.
    """
    attempts = [o.attempts for o in observations]
    return upper_bound(_q_from_attempts(attempts, k))


def mean_attempts_score(observations: list[Observation], k: int) -> float:
    """Alternative ranking statistic for trim sensitivity checks."""
    if not observations:
        raise NoData("session has no observations")
    return float(np.mean([o.attempts for o in observations]))
