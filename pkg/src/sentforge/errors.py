"""Exception hierarchy shared across the package."""


class SentforgeError(Exception):
    """Base class for all errors raised by this package."""


class EmptySentenceError(SentforgeError):
    """Raised when a sentence to tokenize is blank."""


class InvalidOrderError(SentforgeError):
    """Raised when an n-gram order below 2 is requested."""


class ShapeError(SentforgeError):
    """Structural mismatch: ragged tuples, layer counts, mixed orders."""


class ArityError(SentforgeError):
    """A query argument has the wrong length for the indexed order."""


class LexiconError(SentforgeError):
    """Malformed wordlist or syllable-override data."""


class ModelConfigError(SentforgeError):
    """A constraint model violates its schema or invariants."""


class ScorerError(SentforgeError):
    """An external scorer could not be reached at all."""


class MemoryGuardExceeded(SentforgeError):
    """Compilation aborted because the per-layer state count hit the guard.

    Carries the partially filled stats object so callers can report how far
    compilation got before the abort.
    """

    def __init__(self, message, partial_stats=None):
        super().__init__(message)
        self.partial_stats = partial_stats
