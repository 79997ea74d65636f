"""Per-token attributes consumed as arc costs: character and syllable counts.

Character counts are Unicode scalar counts of the token surface. Syllable
counts come from an override table when one is loaded, otherwise from a
vowel-group heuristic. The comma is a first-class token: always allowed,
zero syllables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import LexiconError

COMMA = ","

_VOWELS = frozenset("aeiouy")


def char_count(token: str) -> int:
    """Number of Unicode scalars in the token surface."""
    return len(token)


def _heuristic_part(part: str) -> int:
    """Vowel-group count for one hyphen-free chunk of a token."""
    letters = part.lower()
    groups = 0
    prev_vowel = False
    for ch in letters:
        is_vowel = ch in _VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    # terminal silent 'e' after a consonant, but never down to zero
    if (
        groups > 1
        and len(letters) >= 2
        and letters[-1] == "e"
        and letters[-2].isalpha()
        and letters[-2] not in _VOWELS
    ):
        groups -= 1
    if groups == 0 and any(ch.isalpha() for ch in part):
        groups = 1
    return groups


def heuristic_syllables(token: str) -> int:
    """Default syllable estimate: per hyphen-separated part, summed."""
    if token == COMMA:
        return 0
    return sum(_heuristic_part(part) for part in token.split("-"))


@dataclass(frozen=True)
class Lexicon:
    """Immutable set of allowed token surfaces plus syllable overrides."""

    allowed: frozenset[str]
    syllable_overrides: dict[str, int] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        # the comma is always allowed and always 0 syllables
        object.__setattr__(self, "allowed", frozenset(self.allowed) | {COMMA})
        for token, value in self.syllable_overrides.items():
            if token == COMMA:
                raise LexiconError("comma syllable count is fixed at 0")
            if value < 1:
                raise LexiconError(
                    f"override for {token!r} must be >= 1, got {value}"
                )

    def allows(self, token: str) -> bool:
        return token in self.allowed

    def syllables(self, token: str) -> int:
        return syllable_count(token, self)


def syllable_count(token: str, lexicon: Lexicon | None = None) -> int:
    """Syllables of a token: override if present, else the heuristic."""
    if token == COMMA:
        return 0
    if lexicon is not None:
        override = lexicon.syllable_overrides.get(token)
        if override is not None:
            return override
    return heuristic_syllables(token)


def load_wordlist(path: str | Path) -> frozenset[str]:
    """One word per line, UTF-8; blank lines ignored."""
    words = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            word = line.strip()
            if word:
                words.add(word)
    return frozenset(words)


def load_overrides(path: str | Path) -> dict[str, int]:
    """Two-column TSV: token, positive syllable count."""
    overrides: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise LexiconError(f"{path}:{lineno}: expected 2 columns")
            token, raw = cols
            try:
                value = int(raw)
            except ValueError:
                raise LexiconError(
                    f"{path}:{lineno}: syllable count {raw!r} is not an integer"
                ) from None
            if value < 1:
                raise LexiconError(f"{path}:{lineno}: syllable count must be >= 1")
            overrides[token] = value
    return overrides


def load_lexicon(
    wordlist_path: str | Path,
    overrides_path: str | Path | None = None,
    name: str = "",
) -> Lexicon:
    overrides = load_overrides(overrides_path) if overrides_path else {}
    return Lexicon(
        allowed=load_wordlist(wordlist_path),
        syllable_overrides=overrides,
        name=name or str(wordlist_path),
    )


def build_lexicon(words: Iterable[str], overrides: dict[str, int] | None = None,
                  name: str = "") -> Lexicon:
    """In-memory constructor, mostly for tests and embedding."""
    return Lexicon(frozenset(words), dict(overrides or {}), name)
