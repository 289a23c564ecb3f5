"""Exception hierarchy shared across the engine.

Provider failures are split into unreachable vs. timeout so callers (and the
HTTP layer) can map them to distinct outcomes.
"""

from __future__ import annotations


class EntangleError(Exception):
    """Base class for all engine errors."""


class LibraryError(EntangleError):
    """Axiom corpus failed to load or violated a library invariant."""


class InvariantError(EntangleError, ValueError):
    """A domain value violated its declared invariant."""


class ProviderError(EntangleError):
    """An external provider (embedding or generation) failed."""


class ProviderTimeoutError(ProviderError):
    """An external provider did not answer within its deadline."""


class MissingVectorError(ProviderError, KeyError):
    """A precomputed store has no vector for the requested text."""

    def __init__(self, text_hash: str):
        super().__init__(f"no precomputed vector for text hash {text_hash}")
        self.text_hash = text_hash


class GenerationError(ProviderError):
    """Text generation failed after the configured number of attempts."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(f"{message} (attempts: {attempts})")
        self.attempts = attempts
