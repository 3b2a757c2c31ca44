"""Exception types shared across the package."""


class CharentropyError(Exception):
    """Base class for all package errors."""


class EmptyPool(CharentropyError):
    """No sentences survived filtering, or a trim retained nothing."""


class SentenceTooShort(CharentropyError):
    """Sentence is not longer than the revealed prefix."""


class SessionNotActive(CharentropyError):
    """Operation requires an active session."""


class RateLimited(CharentropyError):
    """Guess arrived before the minimum attempt interval elapsed."""

    def __init__(self, retry_after: float):
        super().__init__(f"retry after {retry_after:.3f}s")
        self.retry_after = retry_after


class RepeatGuess(CharentropyError):
    """Symbol was already tried at the current position."""


class InvalidSymbol(CharentropyError):
    """Guessed symbol is not in the experiment alphabet."""


class CorruptLog(CharentropyError):
    """Event log is inconsistent (non-monotone seq or impossible transition)."""


class NoData(CharentropyError):
    """No observations available for the requested computation."""


class DegenerateAccuracy(CharentropyError):
    """Pooled accuracy is 0 or 1; the binomial tail test is uninformative."""


class InsufficientData(CharentropyError):
    """Too few sessions for a meaningful bootstrap."""


class TokenizationGap(CharentropyError):
    """Token offsets do not tile the sentence."""


class NoCountedTokens(CharentropyError):
    """Every token was masked; bits-per-character is undefined."""


class ProviderUnavailable(CharentropyError):
    """Log-probability provider could not be reached."""


class MalformedResponse(CharentropyError):
    """Provider returned a response that fails validation."""


class ContextTooLong(CharentropyError):
    """Sentence exceeds the provider's context limit."""


class MissingDate(CharentropyError):
    """Source article has no published date in the manifest."""


class UnknownParticipant(CharentropyError):
    """Participant id is not registered."""


class UnknownSession(CharentropyError):
    """Session id is not known to the server."""


class PoolExhausted(CharentropyError):
    """No sentence can be assigned (empty pool)."""
