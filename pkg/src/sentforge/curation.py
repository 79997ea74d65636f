"""Perplexity scoring and ranking of enumerated sentences.

Two scorers are available: a self-contained add-k smoothed n-gram language
model trained on the same corpus records, and a client for an external
scorer process speaking a line protocol (one sentence in, one decimal
perplexity out, "##END##" to shut down). Either way the ranking is the same:
ascending perplexity, ties broken by the rendered text.
"""

from __future__ import annotations

import logging
import math
import queue
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .corpus import NgramRecord, tokenize_sentence
from .errors import ArityError, EmptySentenceError, ScorerError, SentforgeError, ShapeError

logger = logging.getLogger(__name__)

END_SENTINEL = "##END##"


def ppl(seq: Sequence[str], probability: Callable[[Sequence[str]], float]) -> float:
    """Perplexity of a sequence: (1 / P(sequence)) ** (1 / len(sequence)).

    A non-positive probability yields the infinite sentinel (with a logged
    diagnostic) rather than an exception.
    """
    if not seq:
        raise ShapeError("cannot score an empty sequence")
    p = probability(seq)
    if p <= 0.0:
        logger.warning("zero probability for %r; reporting infinite perplexity", seq)
        return math.inf
    return math.exp(-math.log(p) / len(seq))


def ppl_from_logprob(logprob: float, length: int) -> float:
    """Same formula in log space, for callers that avoid underflow."""
    if length < 1:
        raise ShapeError("sequence length must be >= 1")
    return math.exp(-logprob / length)


class NgramLanguageModel:
    """Add-k smoothed n-gram model over the extraction records.

    Sentence-initial positions have no full context; their conditionals are
    estimated from the start-flagged records (record counts stand in for
    start-position counts, which the record schema does not keep separately).
    """

    def __init__(self, order: int, k_add: float):
        if k_add <= 0:
            raise SentforgeError(f"k_add must be positive, got {k_add}")
        self.order = order
        self.k_add = k_add
        self._full: dict[tuple, int] = {}
        self._context: dict[tuple, int] = {}
        self._start_prefix: dict[tuple, int] = {}
        self.vocabulary: frozenset[str] = frozenset()

    @property
    def vocabulary_size(self) -> int:
        return len(self.vocabulary)

    def conditional(self, context: Sequence[str], token: str) -> float:
        """Smoothed P(token | context) for a full length order-1 context."""
        context = tuple(context)
        if len(context) != self.order - 1:
            raise ArityError(
                f"context must have length {self.order - 1}, got {len(context)}"
            )
        v = self.vocabulary_size
        num = self._full.get(context + (token,), 0) + self.k_add
        den = self._context.get(context, 0) + self.k_add * v
        return num / den

    def _start_conditional(self, prefix: tuple, token: str) -> float:
        v = self.vocabulary_size
        num = self._start_prefix.get(prefix + (token,), 0) + self.k_add
        den = self._start_prefix.get(prefix, 0) + self.k_add * v
        return num / den

    def sentence_logprob(self, tokens: Sequence[str]) -> float:
        """Log probability: start-prefix conditionals, then windowed ones."""
        tokens = tuple(tokens)
        if not tokens:
            raise ShapeError("cannot score an empty sentence")
        n = self.order
        logp = 0.0
        for i, token in enumerate(tokens):
            if i < n - 1:
                p = self._start_conditional(tokens[:i], token)
            else:
                p = self.conditional(tokens[i - n + 1 : i], token)
            logp += math.log(p)
        return logp

    def ppl_of(self, tokens: Sequence[str]) -> float:
        return ppl_from_logprob(self.sentence_logprob(tokens), len(tokens))


def train_ngram_lm(records: Sequence[NgramRecord], k_add: float = 1.0,
                   ) -> NgramLanguageModel:
    """Aggregate record counts into the smoothed model."""
    if not records:
        raise SentforgeError("cannot train on an empty record list")
    order = len(records[0].tokens)
    if any(len(r.tokens) != order for r in records):
        raise ShapeError("records mix n-gram orders")
    lm = NgramLanguageModel(order, k_add)
    vocab: set[str] = set()
    for r in records:
        vocab.update(r.tokens)
        lm._full[r.tokens] = lm._full.get(r.tokens, 0) + r.count
        ctx = r.tokens[:-1]
        lm._context[ctx] = lm._context.get(ctx, 0) + r.count
        if r.is_start:
            for j in range(order + 1):
                prefix = r.tokens[:j]
                lm._start_prefix[prefix] = lm._start_prefix.get(prefix, 0) + r.count
    lm.vocabulary = frozenset(vocab)
    return lm


@dataclass(frozen=True)
class ScoredSentence:
    tokens: tuple[str, ...]
    rendered_text: str
    ppl: float
    scorer_id: str
    error: str | None = None


def _tokens_of(sentence: str) -> tuple[str, ...]:
    try:
        return tuple(tokenize_sentence(sentence))
    except EmptySentenceError:
        return ()


def score_with_lm(lm: NgramLanguageModel, sentences: Iterable[str],
                  ) -> list[ScoredSentence]:
    scorer_id = f"ngram-addk[n={lm.order},k={lm.k_add:g}]"
    scored = []
    for sentence in sentences:
        tokens = _tokens_of(sentence)
        if not tokens:
            scored.append(
                ScoredSentence((), sentence, math.inf, scorer_id, "blank sentence")
            )
            continue
        scored.append(
            ScoredSentence(tokens, sentence, lm.ppl_of(tokens), scorer_id)
        )
    return scored


class _LineClient:
    """Lock-step line exchange with a reader thread enforcing timeouts."""

    scorer_id = "line"

    def __init__(self, reader, writer, timeout: float):
        self._reader = reader
        self._writer = writer
        self._timeout = timeout
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, daemon=True)
        self._thread.start()

    def _pump(self):
        try:
            for line in self._reader:
                self._queue.put(line.rstrip("\n"))
        except (OSError, ValueError):
            pass
        self._queue.put(None)  # EOF marker

    def _send(self, line: str) -> bool:
        try:
            self._writer.write(line + "\n")
            self._writer.flush()
            return True
        except (OSError, ValueError):
            return False

    def score_lines(self, lines: Sequence[str]) -> list[str | None]:
        """One raw reply per input line; None marks timeout or closed pipe."""
        replies: list[str | None] = []
        broken = False
        for line in lines:
            if broken or not self._send(line):
                replies.append(None)
                broken = True
                continue
            try:
                reply = self._queue.get(timeout=self._timeout)
            except queue.Empty:
                reply = None
            if reply is None:
                broken = True
            replies.append(reply)
        return replies

    def close(self):
        self._send(END_SENTINEL)


class PipeScorer(_LineClient):
    """Scorer subprocess over stdin/stdout."""

    def __init__(self, command: str | Sequence[str], timeout: float = 120.0):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ScorerError(f"cannot start scorer {argv!r}: {exc}") from exc
        self.scorer_id = f"pipe:{argv[0]}"
        super().__init__(self._proc.stdout, self._proc.stdin, timeout)

    def close(self):
        super().close()
        try:
            self._proc.wait(timeout=30)
        except subprocess.TimeoutExpired:
            self._proc.kill()


class TcpScorer(_LineClient):
    """Scorer reachable over a TCP endpoint."""

    def __init__(self, host: str, port: int, timeout: float = 120.0):
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ScorerError(f"cannot reach scorer at {host}:{port}: {exc}") from exc
        self.scorer_id = f"tcp:{host}:{port}"
        reader = self._sock.makefile("r", encoding="utf-8", newline="\n")
        writer = self._sock.makefile("w", encoding="utf-8", newline="\n")
        super().__init__(reader, writer, timeout)

    def close(self):
        super().close()
        try:
            self._sock.close()
        except OSError:
            pass


def score_external(client: _LineClient, sentences: Sequence[str],
                   ) -> list[ScoredSentence]:
    """Score sentences through a line-protocol client, order-preserving.

    Malformed or missing replies become per-sentence errors (infinite
    perplexity); the batch always yields one entry per input.
    """
    replies = client.score_lines(list(sentences))
    scored = []
    for sentence, reply in zip(sentences, replies):
        tokens = _tokens_of(sentence)
        if reply is None:
            scored.append(
                ScoredSentence(tokens, sentence, math.inf, client.scorer_id,
                               "no reply (timeout or scorer gone)")
            )
            continue
        try:
            value = float(reply)
        except ValueError:
            value = math.nan
        if not (value > 0 and math.isfinite(value)):
            scored.append(
                ScoredSentence(tokens, sentence, math.inf, client.scorer_id,
                               f"unparseable reply {reply!r}")
            )
            continue
        scored.append(ScoredSentence(tokens, sentence, value, client.scorer_id))
    return scored


def rank(scored: Iterable[ScoredSentence], top_k: int | None = None,
         ) -> list[ScoredSentence]:
    """Ascending perplexity, ties broken by rendered text; first top_k if set."""
    ordered = sorted(scored, key=lambda s: (s.ppl, s.rendered_text))
    if top_k is not None:
        return ordered[: max(top_k, 0)]
    return ordered


def write_ranked_tsv(scored: Sequence[ScoredSentence], path) -> None:
    """Rows: rank, perplexity, sentence."""
    with open(path, "w", encoding="utf-8") as handle:
        for position, s in enumerate(scored, 1):
            value = "inf" if math.isinf(s.ppl) else f"{s.ppl:.6f}"
            handle.write(f"{position}\t{value}\t{s.rendered_text}\n")
