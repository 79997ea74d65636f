"""Compile a constraint model against an n-gram index into a reduced MDD.

The compiler never materializes per-constraint diagrams. It runs a layered
expansion where each partial sentence is collapsed to a state key: the last
order-1 tokens (what chaining needs) plus the partial sums of every knapsack
window still open (what the character/syllable constraints need). Equal keys
have equal feasible completions, so merging them as they appear performs the
constraint intersection and most of the reduction in one pass; a structural
reduce finishes the job.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import MemoryGuardExceeded, ModelConfigError, ShapeError
from .lexicon import Lexicon, syllable_count
from .mdd import Mdd, count_solutions, normalize, reduce_mdd
from .model import ConstraintModel, UnaryRule, validate_model
from .ngram_index import NgramIndex

CHAR_DIM = 0
SYLL_DIM = 1


@dataclass
class CompileStats:
    """Shape and effort figures for one compilation."""

    layer_nodes: list[int] = field(default_factory=list)
    layer_arcs: list[int] = field(default_factory=list)
    peak_states: int = 0
    seconds: float = 0.0
    solutions: int | None = None

    def total_nodes(self) -> int:
        return sum(self.layer_nodes)

    def total_arcs(self) -> int:
        return sum(self.layer_arcs)

    def to_tsv(self) -> str:
        rows = ["layer\tnodes\tarcs"]
        for i, nodes in enumerate(self.layer_nodes):
            arcs = self.layer_arcs[i] if i < len(self.layer_arcs) else 0
            rows.append(f"{i}\t{nodes}\t{arcs}")
        sols = "na" if self.solutions is None else str(self.solutions)
        rows.append(
            f"summary\t{self.total_nodes()}\t{self.total_arcs()}\t{sols}\t{self.seconds:.3f}"
        )
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class _Window:
    """One bounded sum: a char knapsack or the syllable total."""

    dim: int
    start: int
    end: int
    lo: int
    hi: int


def _model_windows(m: ConstraintModel) -> list[_Window]:
    windows = [
        _Window(CHAR_DIM, ks.start, ks.end, ks.min_chars, ks.max_chars)
        for ks in m.char_knapsacks
    ]
    if m.syllable_sum is not None:
        windows.append(
            _Window(SYLL_DIM, 1, m.variable_count, m.syllable_sum, m.syllable_sum)
        )
    return windows


def _position_cost_ranges(m: ConstraintModel, lexicon: Lexicon,
                          vocabulary: frozenset[str],
                          ) -> list[tuple[tuple[int, int], tuple[int, int]] | None]:
    """Per position 1..N: ((char lo, hi), (syll lo, hi)) over allowed tokens.

    ``None`` marks a position whose unary rule excludes the whole vocabulary;
    no sentence can exist then.
    """
    ranges: list = [None]  # 1-based
    for p in range(1, m.variable_count + 1):
        rule = m.unary.get(p)
        char_lo = syll_lo = None
        char_hi = syll_hi = None
        for token in vocabulary:
            if rule is not None and not rule.allows(token, lexicon):
                continue
            c = m.token_char_cost(p, token)
            s = syllable_count(token, lexicon)
            char_lo = c if char_lo is None else min(char_lo, c)
            char_hi = c if char_hi is None else max(char_hi, c)
            syll_lo = s if syll_lo is None else min(syll_lo, s)
            syll_hi = s if syll_hi is None else max(syll_hi, s)
        if char_lo is None:
            ranges.append(None)
        else:
            ranges.append(((char_lo, char_hi), (syll_lo, syll_hi)))
    return ranges


def remaining_cost_bounds(m: ConstraintModel, lexicon: Lexicon, index: NgramIndex,
                          ) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Admissible bounds on the cost still to come after each layer.

    ``bounds[i]`` covers positions i+1..N, one (lo, hi) pair per cost
    dimension (characters, then syllables). Positions with an empty allowed
    set contribute (0, 0); any such position makes the diagram empty, so the
    bounds are vacuous there.
    """
    ranges = _position_cost_ranges(m, lexicon, index.vocabulary)
    n = m.variable_count
    bounds = []
    char_lo = char_hi = syll_lo = syll_hi = 0
    tail: list = [((0, 0), (0, 0))]
    for p in range(n, 0, -1):
        r = ranges[p] or ((0, 0), (0, 0))
        char_lo += r[0][0]
        char_hi += r[0][1]
        syll_lo += r[1][0]
        syll_hi += r[1][1]
        tail.append(((char_lo, char_hi), (syll_lo, syll_hi)))
    tail.reverse()
    return tail


@dataclass(frozen=True)
class _CarrySlot:
    prev_slot: int | None   # None: the window opens at this position
    dim: int
    hi: int
    lo: int
    rem_min: int            # achievable cost over the window's remaining positions
    rem_max: int


@dataclass(frozen=True)
class _CloseCheck:
    prev_slot: int | None
    dim: int
    lo: int
    hi: int


def _window_plans(m: ConstraintModel, windows: list[_Window],
                  ranges: list) -> tuple[list, list]:
    """Per position: how open-window accumulators shift, close and prune."""
    n = m.variable_count
    # cumulative per-dimension minima/maxima for remaining-cost sums
    cum_min = [[0], [0]]
    cum_max = [[0], [0]]
    for p in range(1, n + 1):
        r = ranges[p] or ((0, 0), (0, 0))
        for dim in (CHAR_DIM, SYLL_DIM):
            cum_min[dim].append(cum_min[dim][-1] + r[dim][0])
            cum_max[dim].append(cum_max[dim][-1] + r[dim][1])

    def rem(dim: int, frm: int, to: int) -> tuple[int, int]:
        return (cum_min[dim][to] - cum_min[dim][frm],
                cum_max[dim][to] - cum_max[dim][frm])

    carries: list = [None]
    closes: list = [None]
    for p in range(1, n + 1):
        prev_open = [w for w in windows if w.start <= p - 1 < w.end]
        prev_slot = {id(w): i for i, w in enumerate(prev_open)}
        carry = []
        for w in windows:
            if w.start <= p < w.end:
                rem_min, rem_max = rem(w.dim, p, w.end)
                carry.append(
                    _CarrySlot(prev_slot.get(id(w)), w.dim, w.hi, w.lo, rem_min, rem_max)
                )
        close = [
            _CloseCheck(prev_slot.get(id(w)), w.dim, w.lo, w.hi)
            for w in windows
            if w.end == p
        ]
        carries.append(carry)
        closes.append(close)
    return carries, closes


def compile_model(m: ConstraintModel, index: NgramIndex, lexicon: Lexicon, *,
                  max_states: int | None = None,
                  feasibility_pruning: bool = True,
                  ) -> tuple[Mdd, CompileStats]:
    """Build the diagram of every sentence satisfying all model constraints.

    Arc costs are (characters, syllables) under the rendering cost rule. The
    result is trimmed and reduced; an unsatisfiable model yields an empty
    diagram, not an error. ``max_states`` aborts with MemoryGuardExceeded
    when any layer's live state count passes the guard.
    """
    errors = validate_model(m)
    if errors:
        raise ModelConfigError("; ".join(errors))
    if index.order != m.chaining_order:
        raise ShapeError(
            f"index order {index.order} != model chaining order {m.chaining_order}"
        )
    started = time.perf_counter()
    n = m.variable_count
    k = m.chaining_order
    windows = _model_windows(m)
    ranges = _position_cost_ranges(m, lexicon, index.vocabulary)
    line_starts = m.line_starts()
    syllables = {t: syllable_count(t, lexicon) for t in index.vocabulary}

    def finish(mdd: Mdd, peak: int) -> tuple[Mdd, CompileStats]:
        stats = CompileStats(
            layer_nodes=mdd.layer_widths(),
            layer_arcs=[len(mdd.arcs_in_layer(i)) for i in range(mdd.layer_count)],
            peak_states=peak,
            seconds=time.perf_counter() - started,
            solutions=count_solutions(mdd),
        )
        return mdd, stats

    if any(ranges[p] is None for p in range(1, n + 1)):
        return finish(normalize(n, 2, 0, [dict() for _ in range(n)]), 1)

    carries, closes = _window_plans(m, windows, ranges)
    unary_rules = {p: m.unary[p] for p in m.unary}

    def costs_at(p: int, token: str) -> tuple[int, int]:
        chars = len(token)
        if p not in line_starts and token != ",":
            chars += 1
        return chars, syllables[token]

    def advance(accs: tuple[int, ...], p: int, cost: tuple[int, int],
                ) -> tuple[int, ...] | None:
        new = []
        for slot in carries[p]:
            value = (0 if slot.prev_slot is None else accs[slot.prev_slot]) + cost[slot.dim]
            if value > slot.hi:
                return None
            if feasibility_pruning and (
                value + slot.rem_max < slot.lo or value + slot.rem_min > slot.hi
            ):
                return None
            new.append(value)
        for check in closes[p]:
            value = (0 if check.prev_slot is None else accs[check.prev_slot]) + cost[check.dim]
            if not (check.lo <= value <= check.hi):
                return None
        return tuple(new)

    def allowed(p: int, token: str) -> bool:
        rule = unary_rules.get(p)
        return rule is None or rule.allows(token, lexicon)

    root_key = ((), ())
    layers: list[dict] = [{root_key: None}]
    outgoing: list[dict] = [dict() for _ in range(n)]
    peak = 1

    def guard(layer: dict, depth: int) -> None:
        nonlocal peak
        peak = max(peak, len(layer))
        if max_states is not None and len(layer) > max_states:
            partial = CompileStats(
                layer_nodes=[len(states) for states in layers],
                layer_arcs=[
                    sum(len(arcs) for arcs in out.values())
                    for out in outgoing[:depth]
                ],
                peak_states=peak,
                seconds=time.perf_counter() - started,
                solutions=None,
            )
            raise MemoryGuardExceeded(
                f"layer {depth} holds {len(layer)} states, guard is {max_states}",
                partial_stats=partial,
            )

    # positions 1..k expand jointly from the start n-grams
    start_trie: dict = {}
    for gram in sorted(index.start_ngrams()):
        node = start_trie
        for token in gram:
            node = node.setdefault(token, {})
    for depth in range(k):
        layers.append({})

    def seed(prefix: tuple, key, node: dict) -> None:
        depth = len(prefix)
        p = depth + 1
        for token in sorted(node):
            if p == k == n and not index.is_end(prefix + (token,)):
                continue
            if not allowed(p, token):
                continue
            accs = advance(key[1], p, costs_at(p, token))
            if accs is None:
                continue
            grown = prefix + (token,)
            next_key = (grown[-(k - 1):], accs)
            outgoing[depth].setdefault(key, {})[token] = (costs_at(p, token), next_key)
            layers[p][next_key] = None
            if p < k:
                seed(grown, next_key, node[token])

    seed((), root_key, start_trie)
    for p in range(1, k + 1):
        guard(layers[p], p)

    for p in range(k + 1, n + 1):
        current: dict = {}
        out_layer = outgoing[p - 1]
        for key in layers[p - 1]:
            suffix, accs = key
            for token in sorted(index.successors(suffix)):
                if p == n and not index.is_end(suffix + (token,)):
                    continue
                if not allowed(p, token):
                    continue
                cost = costs_at(p, token)
                next_accs = advance(accs, p, cost)
                if next_accs is None:
                    continue
                next_key = (suffix[1:] + (token,), next_accs)
                out_layer.setdefault(key, {})[token] = (cost, next_key)
                current[next_key] = None
        layers.append(current)
        guard(current, p)
        if not current:
            break

    while len(layers) < n + 1:
        layers.append({})
    mdd = reduce_mdd(normalize(n, 2, root_key, outgoing))
    return finish(mdd, peak)


def refine(mdd: Mdd, extra_unary: Mapping[int, UnaryRule], lexicon: Lexicon) -> Mdd:
    """Drop paths violating additional per-position rules; reduce the rest.

    Intended for hardening an already-compiled diagram (tighter bounds than
    the compiled ones); the filter itself is exact for any rule set.
    """
    out_maps = mdd.outgoing_maps()
    filtered = []
    for i, layer in enumerate(out_maps):
        rule = extra_unary.get(i + 1)
        if rule is None:
            filtered.append(layer)
            continue
        filtered.append(
            {
                node: {
                    label: arc
                    for label, arc in arcs.items()
                    if rule.allows(label, lexicon)
                }
                for node, arcs in layer.items()
            }
        )
    if mdd.is_empty:
        return mdd
    return reduce_mdd(normalize(mdd.layer_count, mdd.cost_arity, 0, filtered))
