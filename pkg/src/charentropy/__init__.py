"""Character-guessing entropy experiments.

Corpus preparation, guessing-session state machine, Shannon-style entropy
bounds with outlier filtering and bootstrap CIs, an HTTP experiment
server, and bits-per-character evaluation of token language models.
"""

from .alphabet import Alphabet, ukrainian
from .corpus import RawArticle, SentenceRecord, build_pool, normalize
from .estimator import (
    EntropyBounds,
    PooledEstimate,
    PositionWindow,
    QDistribution,
    lower_bound,
    pooled_estimate,
    q_distribution,
    session_score,
    upper_bound,
)
from .robustness import (
    BootstrapResult,
    SessionSummary,
    TrimRow,
    binomial_outlier_filter,
    bootstrap_upper,
    trim_bottom,
    trim_table,
)
from .session import (
    GuessEvent,
    GuessOutcome,
    Observation,
    Session,
    SessionConfig,
    abandon_session,
    derive_observations,
    start_session,
    submit_guess,
)

__all__ = [
    "Alphabet", "ukrainian",
    "RawArticle", "SentenceRecord", "build_pool", "normalize",
    "EntropyBounds", "PooledEstimate", "PositionWindow", "QDistribution",
    "lower_bound", "pooled_estimate", "q_distribution", "session_score",
    "upper_bound",
    "BootstrapResult", "SessionSummary", "TrimRow",
    "binomial_outlier_filter", "bootstrap_upper", "trim_bottom", "trim_table",
    "GuessEvent", "GuessOutcome", "Observation", "Session", "SessionConfig",
    "abandon_session", "derive_observations", "start_session", "submit_guess",
]

__version__ = "0.1.0"
