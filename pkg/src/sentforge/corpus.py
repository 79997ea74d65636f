"""Corpus ingestion: tokenization, n-gram extraction, lexicon filtering.

Sentences arrive one per line. Tokenization splits on whitespace, detaches a
trailing comma into its own token, and drops the terminal period. Extracted
n-grams carry counts plus sentence-start/sentence-end flags which later drive
the start/end chaining constraints.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptySentenceError, InvalidOrderError, ShapeError
from .lexicon import COMMA, Lexicon

Token = str


@dataclass(frozen=True)
class NgramRecord:
    """One distinct n-gram with its aggregated corpus statistics."""

    tokens: tuple[Token, ...]
    count: int
    is_start: bool
    is_end: bool


def tokenize_sentence(text: str) -> list[Token]:
    """Split one sentence into tokens.

    Trailing commas become separate "," tokens; the sentence-final period is
    dropped. Raises EmptySentenceError on blank input.
    """
    if not text.strip():
        raise EmptySentenceError("blank sentence")
    words = text.split()
    # drop terminal punctuation from the final word
    last = words[-1].rstrip(".")
    if last:
        words[-1] = last
    else:
        words.pop()
    tokens: list[Token] = []
    for word in words:
        commas = 0
        while word.endswith(COMMA):
            word = word[:-1]
            commas += 1
        if word:
            tokens.append(word)
        tokens.extend([COMMA] * commas)
    if not tokens:
        raise EmptySentenceError(f"no tokens in {text!r}")
    return tokens


def read_corpus(path: str | Path) -> list[list[Token]]:
    """Tokenize a one-sentence-per-line file, skipping blank lines."""
    sentences = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                sentences.append(tokenize_sentence(line))
    return sentences


def extract_ngrams(sentences: Iterable[Sequence[Token]], n: int) -> list[NgramRecord]:
    """All length-n windows of every sentence, aggregated across the corpus.

    Sentences shorter than n are skipped (see count_short_sentences for the
    report figure). A window is start-flagged if it opens some sentence and
    end-flagged if it closes some sentence.
    """
    if n < 2:
        raise InvalidOrderError(f"n-gram order must be >= 2, got {n}")
    agg: dict[tuple[Token, ...], list] = {}
    for sentence in sentences:
        if len(sentence) < n:
            continue
        last = len(sentence) - n
        for i in range(last + 1):
            key = tuple(sentence[i : i + n])
            entry = agg.get(key)
            if entry is None:
                entry = agg[key] = [0, False, False]
            entry[0] += 1
            if i == 0:
                entry[1] = True
            if i == last:
                entry[2] = True
    return [
        NgramRecord(tokens, count, is_start, is_end)
        for tokens, (count, is_start, is_end) in sorted(agg.items())
    ]


def count_short_sentences(sentences: Iterable[Sequence[Token]], n: int) -> int:
    """How many sentences extract_ngrams would skip for this order."""
    return sum(1 for sentence in sentences if len(sentence) < n)


def filter_ngrams(records: Iterable[NgramRecord], lexicon: Lexicon) -> list[NgramRecord]:
    """Keep only records whose tokens are all allowed by the lexicon."""
    kept = [r for r in records if all(lexicon.allows(t) for t in r.tokens)]
    kept.sort(key=lambda r: r.tokens)
    return kept


def write_ngram_tsv(records: Iterable[NgramRecord], path: str | Path) -> None:
    """TSV rows: n surfaces, count, isStart, isEnd; sorted lexicographically."""
    rows = sorted(records, key=lambda r: r.tokens)
    with open(path, "w", encoding="utf-8") as handle:
        for r in rows:
            cols = list(r.tokens) + [str(r.count), str(int(r.is_start)), str(int(r.is_end))]
            handle.write("\t".join(cols) + "\n")


def read_ngram_tsv(path: str | Path) -> list[NgramRecord]:
    records = []
    order: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) < 5:
                raise ShapeError(f"{path}:{lineno}: expected at least 5 columns")
            n = len(cols) - 3
            if order is None:
                order = n
            elif n != order:
                raise ShapeError(f"{path}:{lineno}: mixed n-gram orders {order} and {n}")
            tokens = tuple(cols[:n])
            records.append(
                NgramRecord(tokens, int(cols[n]), cols[n + 1] == "1", cols[n + 2] == "1")
            )
    return records
