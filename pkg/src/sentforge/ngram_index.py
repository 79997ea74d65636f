"""Depth-n deterministic trie over n-grams with successor retrieval.

The index answers three questions the sentence compiler keeps asking: which
tokens may follow a length n-1 context, which n-grams may open a sentence,
and which may close one. Counts are retained for the built-in language model.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .corpus import NgramRecord, Token
from .errors import ArityError, ShapeError


class NgramIndex:
    """Immutable trie over a fixed-order n-gram set."""

    def __init__(self, order: int, records: Iterable[NgramRecord]):
        if order < 2:
            raise ShapeError(f"index order must be >= 2, got {order}")
        self.order = order
        self._records: dict[tuple[Token, ...], NgramRecord] = {}
        self._children: dict = {}
        vocab: set[Token] = set()
        for record in sorted(records, key=lambda r: r.tokens):
            if len(record.tokens) != order:
                raise ShapeError(
                    f"record {record.tokens} has order {len(record.tokens)}, expected {order}"
                )
            self._records[record.tokens] = record
            node = self._children
            for token in record.tokens:
                node = node.setdefault(token, {})
            vocab.update(record.tokens)
        self.vocabulary: frozenset[Token] = frozenset(vocab)
        self._starts = frozenset(t for t, r in self._records.items() if r.is_start)
        self._ends = frozenset(t for t, r in self._records.items() if r.is_end)

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[NgramRecord]:
        return [self._records[key] for key in sorted(self._records)]

    def contains(self, ngram: Sequence[Token]) -> bool:
        return tuple(ngram) in self._records

    def count_of(self, ngram: Sequence[Token]) -> int:
        record = self._records.get(tuple(ngram))
        return record.count if record else 0

    def is_start(self, ngram: Sequence[Token]) -> bool:
        return tuple(ngram) in self._starts

    def is_end(self, ngram: Sequence[Token]) -> bool:
        return tuple(ngram) in self._ends

    def successors(self, context: Sequence[Token]) -> set[Token]:
        """Tokens w such that context + (w,) is a stored n-gram."""
        if len(context) != self.order - 1:
            raise ArityError(
                f"context must have length {self.order - 1}, got {len(context)}"
            )
        node = self._children
        for token in context:
            node = node.get(token)
            if node is None:
                return set()
        return set(node)

    def start_ngrams(self) -> frozenset[tuple[Token, ...]]:
        return self._starts

    def end_ngrams(self) -> frozenset[tuple[Token, ...]]:
        return self._ends


def build_index(records: Sequence[NgramRecord], order: int | None = None) -> NgramIndex:
    """Index a record list; the order is inferred unless given explicitly."""
    if order is None:
        if not records:
            raise ShapeError("cannot infer the order of an empty record list")
        order = len(records[0].tokens)
    return NgramIndex(order, records)
