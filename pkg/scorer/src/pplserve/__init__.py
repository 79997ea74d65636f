"""pplserve: a line-protocol perplexity scorer around a causal language model."""

from .scoring import ScoringSession

__version__ = "0.1.0"
