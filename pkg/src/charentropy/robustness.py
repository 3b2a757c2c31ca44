"""Outlier rejection, trim sensitivity, and bootstrap confidence intervals.

Three-stage robustness pipeline for the pooled upper bound:

1. Binomial outlier filter: discard sessions whose accuracy is improbably
   *good* under the pooled mean accuracy (suspected lookup/cheating). The
   tail test is one-sided; poor performers are never discarded here.
2. Bottom trim: drop the worst-scoring fraction of the remaining sessions.
3. Session-level bootstrap: resample the trimmed session pool with
   replacement and recompute the pooled upper bound per replicate;
   report the percentile median and 95% CI.

Each bootstrap replicate seeds its own RNG stream from (seed, replicate
index), so parallel and serial execution agree bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import binom

from .errors import DegenerateAccuracy, EmptyPool, InsufficientData, NoData
from .estimator import PositionWindow, pooled_estimate, session_score
from .session import Observation


@dataclass(frozen=True)
class SessionSummary:
    session_id: str
    total_guesses: int
    correct_guesses: int
    score: float  # bits/char, lower is better
    suspicious: bool = False


@dataclass(frozen=True)
class TrimRow:
    trim_fraction: float
    pool_size: int
    point_estimate: float
    bootstrap_median: float
    ci95: tuple[float, float]

    @property
    def ci_width(self) -> float:
        return self.ci95[1] - self.ci95[0]


@dataclass(frozen=True)
class BootstrapResult:
    replicates: int
    estimates: np.ndarray
    median: float
    ci95: tuple[float, float]
    seed: int


def summarize_sessions(
    observations: list[Observation],
    k: int,
    totals: dict[str, int] | None = None,
) -> list[SessionSummary]:
    """Group observations by session and score each session.

    ``totals`` maps session_id to the true total guess count (correct +
    wrong) when the event log is available; without it, the sum of
    attempts is used, which misses only trailing wrong guesses on an
    unfinished position.
    """
    by_session: dict[str, list[Observation]] = {}
    for o in observations:
        by_session.setdefault(o.session_id, []).append(o)
    summaries = []
    for sid in sorted(by_session):
        obs = by_session[sid]
        total = totals[sid] if totals else sum(o.attempts for o in obs)
        summaries.append(
            SessionSummary(
                session_id=sid,
                total_guesses=total,
                correct_guesses=len(obs),
                score=session_score(obs, k),
            )
        )
    return summaries


def binomial_outlier_filter(
    sessions: list[SessionSummary],
    alpha: float = 0.01,
) -> tuple[list[SessionSummary], list[SessionSummary]]:
    """Split sessions into (kept, discarded) by the one-sided binomial tail.

    A session is discarded iff P[X >= correct] under
    Binomial(total, pooled mean accuracy) is below alpha. The pooled mean
    is computed over all sessions in a single pass, before any discarding.
    """
    if not sessions:
        raise NoData("no sessions to filter")
    total = sum(s.total_guesses for s in sessions)
    correct = sum(s.correct_guesses for s in sessions)
    p_bar = correct / total
    if p_bar <= 0.0 or p_bar >= 1.0:
        raise DegenerateAccuracy(f"pooled accuracy {p_bar}")
    kept, discarded = [], []
    for s in sessions:
        # sf(c - 1) = P[X >= c], exact tail
        tail = float(binom.sf(s.correct_guesses - 1, s.total_guesses, p_bar))
        if tail < alpha:
            discarded.append(replace(s, suspicious=True))
        else:
            kept.append(s)
    return kept, discarded


def trim_bottom(sessions: list[SessionSummary], fraction: float) -> list[SessionSummary]:
    """Retain the best-scoring ceil((1 - fraction) * N) sessions.

    Ascending score order (lower bits/char = better); ties broken by
    higher guess volume, then session id, so the retained set is
    deterministic.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("trim fraction must be in [0, 1)")
    ordered = sorted(sessions, key=lambda s: (s.score, -s.total_guesses, s.session_id))
    retained = ordered[: math.ceil((1.0 - fraction) * len(ordered))]
    if not retained:
        raise EmptyPool("trim retained no sessions")
    return retained


def _session_count_matrix(
    sessions_obs: list[list[Observation]],
    window: PositionWindow,
    k: int,
) -> np.ndarray:
    """Per-session observation counts, shape (sessions, positions, K)."""
    n_pos = window.n2 - window.n1 + 1
    mats = np.zeros((len(sessions_obs), n_pos, k), dtype=np.float64)
    for si, obs in enumerate(sessions_obs):
        for o in obs:
            if o.position in window:
                mats[si, o.position - window.n1, o.attempts - 1] += 1
    return mats


def _pooled_upper_from_counts(counts: np.ndarray) -> float:
    """Pooled upper bound from a (positions, K) count matrix.

    Equivalent to the weighted mean of per-position entropies with
    w_n = N_n / sum N_k; positions with zero observations drop out.
    """
    n_per_pos = counts.sum(axis=1)
    total = n_per_pos.sum()
    if total == 0:
        raise NoData("no in-window observations")
    occupied = n_per_pos > 0
    counts = counts[occupied]
    n_per_pos = n_per_pos[occupied]
    q = counts / n_per_pos[:, None]
    log_q = np.zeros_like(q)
    np.log2(q, out=log_q, where=q > 0)
    h_per_pos = -(q * log_q).sum(axis=1)
    return float(np.dot(n_per_pos, h_per_pos) / total)


def bootstrap_upper(
    sessions_obs: list[list[Observation]],
    window: PositionWindow,
    k: int,
    replicates: int = 2000,
    seed: int = 0,
) -> BootstrapResult:
    """Percentile bootstrap of the pooled upper bound over sessions.

    Each replicate draws len(sessions) sessions with replacement and
    recomputes the pooled bound from the resampled observations.
    """
    n = len(sessions_obs)
    if n < 2:
        raise InsufficientData("bootstrap needs at least 2 sessions")
    mats = _session_count_matrix(sessions_obs, window, k)
    if mats.sum() == 0:
        raise NoData("no in-window observations")
    estimates = np.empty(replicates)
    for r in range(replicates):
        rng = np.random.default_rng([seed, r])
        idx = rng.integers(0, n, size=n)
        mult = np.bincount(idx, minlength=n).astype(np.float64)
        estimates[r] = _pooled_upper_from_counts(np.tensordot(mult, mats, axes=1))
    lo, med, hi = np.percentile(estimates, [2.5, 50.0, 97.5])
    return BootstrapResult(
        replicates=replicates,
        estimates=estimates,
        median=float(med),
        ci95=(float(lo), float(hi)),
        seed=seed,
    )


def trim_table(
    observations_by_session: dict[str, list[Observation]],
    summaries: list[SessionSummary],
    fractions: list[float],
    window: PositionWindow,
    k: int,
    replicates: int = 2000,
    seed: int = 0,
) -> list[TrimRow]:
    """One TrimRow per trim fraction, ascending.

    ``summaries`` should already have passed the binomial filter; the
    bootstrap resamples each trimmed pool as-is (trim is not re-applied
    inside replicates).
    """
    rows = []
    for fraction in sorted(fractions):
        retained = trim_bottom(summaries, fraction)
        obs_lists = [observations_by_session[s.session_id] for s in retained]
        flat = [o for obs in obs_lists for o in obs]
        point = pooled_estimate(flat, window, k).h_upper
        boot = bootstrap_upper(obs_lists, window, k, replicates=replicates, seed=seed)
        rows.append(
            TrimRow(
                trim_fraction=fraction,
                pool_size=len(retained),
                point_estimate=point,
                bootstrap_median=boot.median,
                ci95=boot.ci95,
            )
        )
    return rows
