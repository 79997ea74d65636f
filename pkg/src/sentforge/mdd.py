"""Reduced ordered multi-valued decision diagrams with arc costs.

A diagram has one arc layer per variable. Nodes are integers local to their
node layer; layer 0 holds the single root, the layer after the last arc layer
holds the single terminal (or nothing when the diagram accepts no tuple).
Every arc carries a label and a fixed-arity tuple of integer costs; a path's
cost is the componentwise sum of its arc costs.

All public constructors return diagrams that are trimmed (every node lies on
a root-to-terminal path), deterministic (one outgoing arc per label per node)
and reduced (no two nodes of a layer share an outgoing arc signature), with a
canonical node numbering so that structural equality is plain ``==``.
"""

from __future__ import annotations

import json
from typing import Callable, Iterable, Iterator, Sequence

from .errors import ShapeError

# a label is any hashable, orderable value; token surfaces and ints in practice
Label = object
Cost = tuple[int, ...]
# arc tuples are (source node, label, cost, target node)
Arc = tuple[int, object, Cost, int]

_FORMAT_VERSION = 1


class Mdd:
    """Immutable layered decision diagram. Build via the module functions."""

    __slots__ = ("layer_count", "cost_arity", "_widths", "_arcs")

    def __init__(self, layer_count: int, cost_arity: int,
                 widths: tuple[int, ...], arcs: tuple[tuple[Arc, ...], ...]):
        self.layer_count = layer_count
        self.cost_arity = cost_arity
        self._widths = widths          # node counts, layers 0..layer_count
        self._arcs = arcs              # arc tuples per arc layer, sorted

    @property
    def is_empty(self) -> bool:
        return self._widths[-1] == 0

    def width(self, layer: int) -> int:
        return self._widths[layer]

    def arcs_in_layer(self, layer: int) -> tuple[Arc, ...]:
        return self._arcs[layer]

    def arc_count(self) -> int:
        return sum(len(layer) for layer in self._arcs)

    def node_count(self) -> int:
        return sum(self._widths)

    def layer_widths(self) -> list[int]:
        """Node count per layer, root layer first, terminal layer excluded."""
        return list(self._widths[:-1])

    def outgoing_maps(self) -> list[dict[int, dict[object, tuple[Cost, int]]]]:
        """Per layer: node -> {label: (cost, target)}. Rebuilt on each call."""
        maps: list[dict[int, dict[object, tuple[Cost, int]]]] = []
        for layer in self._arcs:
            by_src: dict[int, dict[object, tuple[Cost, int]]] = {}
            for src, label, cost, dst in layer:
                by_src.setdefault(src, {})[label] = (cost, dst)
            maps.append(by_src)
        return maps

    def check_invariants(self) -> None:
        """Assert ordered/deterministic/trimmed/reduced structure. Test aid."""
        assert len(self._widths) == self.layer_count + 1
        assert self._widths[0] == 1
        assert self._widths[-1] in (0, 1)
        incoming = [set() for _ in range(self.layer_count + 1)]
        for i, layer in enumerate(self._arcs):
            seen = set()
            for src, label, cost, dst in layer:
                assert 0 <= src < self._widths[i], "arc source outside layer"
                assert 0 <= dst < self._widths[i + 1], "arc target not in next layer"
                assert len(cost) == self.cost_arity
                assert (src, label) not in seen, "two arcs with one label"
                seen.add((src, label))
                incoming[i + 1].add(dst)
            # trimmed: every non-root node has an incoming arc and (except the
            # terminal) an outgoing arc
            sources = {a[0] for a in layer}
            expected = set(range(self._widths[i]))
            if not self.is_empty:
                assert sources == expected, "node without outgoing arc"
                assert incoming[i + 1] == set(range(self._widths[i + 1]))
        for i in range(self.layer_count):
            sigs = {}
            out = self.outgoing_maps()[i]
            for node in range(self._widths[i]):
                sig = tuple(sorted(out.get(node, {}).items(), key=lambda kv: _label_key(kv[0])))
                assert sig not in sigs, "two nodes with equal outgoing signature"
                sigs[sig] = node

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mdd):
            return NotImplemented
        return (
            self.layer_count == other.layer_count
            and self.cost_arity == other.cost_arity
            and self._widths == other._widths
            and self._arcs == other._arcs
        )

    def __hash__(self):
        return hash((self.layer_count, self.cost_arity, self._widths, self._arcs))

    def __repr__(self):
        return (
            f"Mdd(layers={self.layer_count}, nodes={self.node_count()}, "
            f"arcs={self.arc_count()}, solutions={count_solutions(self)})"
        )


def _label_key(label):
    # stable sort across str/int mixes (unusual but cheap to allow)
    return (type(label).__name__, label)


def _empty(layer_count: int, cost_arity: int) -> Mdd:
    widths = (1,) + (0,) * layer_count
    return Mdd(layer_count, cost_arity, widths, tuple(() for _ in range(layer_count)))


def normalize(layer_count: int, cost_arity: int, root,
              outgoing: Sequence[dict]) -> Mdd:
    """Trim and canonically renumber a raw layered graph.

    ``outgoing[i]`` maps an arbitrary hashable node id in layer i to a dict
    ``{label: (cost, target_id)}``. All surviving nodes of the last layer are
    merged into the single terminal. Determinism is inherited from the dict
    shape (one target per label per node).
    """
    reach: list[set] = [set() for _ in range(layer_count + 1)]
    reach[0].add(root)
    for i in range(layer_count):
        layer_out = outgoing[i]
        nxt = reach[i + 1]
        for node in reach[i]:
            for _, (_, dst) in layer_out.get(node, {}).items():
                nxt.add(dst)
    alive: list[set] = [set() for _ in range(layer_count + 1)]
    alive[layer_count] = set(reach[layer_count])
    for i in reversed(range(layer_count)):
        layer_out = outgoing[i]
        alive_next = alive[i + 1]
        for node in reach[i]:
            for _, (_, dst) in layer_out.get(node, {}).items():
                if dst in alive_next:
                    alive[i].add(node)
                    break
    if root not in alive[0]:
        return _empty(layer_count, cost_arity)

    ids: list[dict] = [{root: 0}]
    order: list[list] = [[root]]
    arcs: list[tuple[Arc, ...]] = []
    for i in range(layer_count):
        layer_out = outgoing[i]
        alive_next = alive[i + 1]
        next_ids: dict = {}
        next_order: list = []
        rows: list[Arc] = []
        terminal_layer = i + 1 == layer_count
        for node in order[i]:
            src = ids[i][node]
            items = [
                (label, cost, dst)
                for label, (cost, dst) in layer_out.get(node, {}).items()
                if dst in alive_next
            ]
            items.sort(key=lambda it: _label_key(it[0]))
            for label, cost, dst in items:
                if terminal_layer:
                    new_dst = 0
                    next_ids.setdefault(dst, 0)
                else:
                    new_dst = next_ids.get(dst)
                    if new_dst is None:
                        new_dst = next_ids[dst] = len(next_order)
                        next_order.append(dst)
                rows.append((src, label, tuple(cost), new_dst))
        ids.append(next_ids)
        order.append(next_order if not terminal_layer else [0] if next_ids else [])
        rows.sort(key=lambda a: (a[0], _label_key(a[1])))
        arcs.append(tuple(rows))
    widths = tuple(len(o) for o in order[:-1]) + ((1,) if ids[-1] else (0,))
    return Mdd(layer_count, cost_arity, widths, tuple(arcs))


def reduce_mdd(m: Mdd) -> Mdd:
    """Merge nodes with identical outgoing signatures, bottom-up."""
    if m.is_empty:
        return m
    out_maps = m.outgoing_maps()
    # canonical id per node, per layer (terminal layer first)
    canon: list[dict[int, int]] = [dict() for _ in range(m.layer_count + 1)]
    canon[m.layer_count][0] = 0
    for i in reversed(range(m.layer_count)):
        next_canon = canon[i + 1]
        sig_ids: dict = {}
        for node in range(m.width(i)):
            sig = tuple(
                sorted(
                    ((label, cost, next_canon[dst])
                     for label, (cost, dst) in out_maps[i].get(node, {}).items()),
                    key=lambda it: _label_key(it[0]),
                )
            )
            rep = sig_ids.get(sig)
            if rep is None:
                rep = sig_ids[sig] = len(sig_ids)
            canon[i][node] = rep
    rebuilt: list[dict] = []
    for i in range(m.layer_count):
        layer: dict = {}
        for node in range(m.width(i)):
            rep = canon[i][node]
            if rep in layer:
                continue
            layer[rep] = {
                label: (cost, canon[i + 1][dst])
                for label, (cost, dst) in out_maps[i].get(node, {}).items()
            }
        rebuilt.append(layer)
    return normalize(m.layer_count, m.cost_arity, canon[0][0], rebuilt)


def build_from_tuples(tuples: Iterable[Sequence],
                      cost_fn: Callable[[int, object], Sequence[int]] | None = None,
                      ) -> Mdd:
    """Compile an explicit tuple set into a reduced diagram.

    ``cost_fn(position, label)`` supplies the arc cost tuple; omit it for
    cost-free diagrams. All tuples must share one length >= 1.
    """
    rows = [tuple(t) for t in tuples]
    if not rows:
        raise ShapeError("at least one tuple is required")
    length = len(rows[0])
    if length < 1:
        raise ShapeError("tuples must have length >= 1")
    if any(len(t) != length for t in rows):
        raise ShapeError("ragged tuple lengths")
    arity = len(tuple(cost_fn(0, rows[0][0]))) if cost_fn else 0
    outgoing: list[dict] = [dict() for _ in range(length)]
    for row in rows:
        for i, label in enumerate(row):
            src = row[:i]
            slot = outgoing[i].setdefault(src, {})
            if label not in slot:
                cost = tuple(cost_fn(i, label)) if cost_fn else ()
                slot[label] = (cost, row[: i + 1])
    return reduce_mdd(normalize(length, arity, (), outgoing))


def count_solutions(m: Mdd) -> int:
    """Exact number of root-to-terminal paths (arbitrary precision)."""
    if m.is_empty:
        return 0
    counts = [1]  # terminal
    for i in reversed(range(m.layer_count)):
        layer_counts = [0] * m.width(i)
        for src, _, _, dst in m.arcs_in_layer(i):
            layer_counts[src] += counts[dst]
        counts = layer_counts
    return counts[0]


def iter_paths(m: Mdd) -> Iterator[tuple[tuple, Cost]]:
    """Depth-first path walk in lexicographic label order."""
    if m.is_empty:
        return
    out_maps = m.outgoing_maps()
    zero = (0,) * m.cost_arity
    sorted_out = [
        {
            node: sorted(items.items(), key=lambda kv: _label_key(kv[0]))
            for node, items in layer.items()
        }
        for layer in out_maps
    ]

    def walk(layer: int, node: int, labels: tuple, cost: Cost):
        if layer == m.layer_count:
            yield labels, cost
            return
        for label, (arc_cost, dst) in sorted_out[layer].get(node, []):
            yield from walk(
                layer + 1,
                dst,
                labels + (label,),
                tuple(a + b for a, b in zip(cost, arc_cost)),
            )

    yield from walk(0, 0, (), zero)


def enumerate_paths(m: Mdd, limit: int | None = None) -> list[tuple[tuple, Cost]]:
    """All paths with their summed costs; first ``limit`` when set."""
    if limit is not None and limit <= 0:
        return []
    out = []
    for item in iter_paths(m):
        out.append(item)
        if limit is not None and len(out) >= limit:
            break
    return out


def path_set(m: Mdd) -> set[tuple]:
    """Label tuples of all paths, ignoring costs. Oracle/test helper."""
    return {labels for labels, _ in iter_paths(m)}


def layer_widths(m: Mdd) -> list[int]:
    return m.layer_widths()


def _merge_cost(cost_a: Cost, cost_b: Cost, arity_a: int, arity_b: int) -> Cost:
    if arity_a == 0:
        return cost_b
    if arity_b == 0:
        return cost_a
    if cost_a != cost_b:
        raise ShapeError(f"conflicting arc costs {cost_a} vs {cost_b}")
    return cost_a


def intersect(a: Mdd, b: Mdd) -> Mdd:
    """Diagram whose path set is the intersection of both path sets.

    Costs must agree where both diagrams carry them; a zero-arity diagram is
    cost-neutral.
    """
    if a.layer_count != b.layer_count:
        raise ShapeError(
            f"layer counts differ: {a.layer_count} vs {b.layer_count}"
        )
    if a.cost_arity and b.cost_arity and a.cost_arity != b.cost_arity:
        raise ShapeError("cost arities differ")
    arity = a.cost_arity or b.cost_arity
    if a.is_empty or b.is_empty:
        return _empty(a.layer_count, arity)
    out_a = a.outgoing_maps()
    out_b = b.outgoing_maps()
    outgoing: list[dict] = [dict() for _ in range(a.layer_count)]
    frontier = {(0, 0)}
    for i in range(a.layer_count):
        next_frontier = set()
        layer = outgoing[i]
        for pair in frontier:
            na, nb = pair
            arcs_a = out_a[i].get(na, {})
            arcs_b = out_b[i].get(nb, {})
            labels = arcs_a if len(arcs_a) <= len(arcs_b) else arcs_b
            slot = {}
            for label in labels:
                hit_a = arcs_a.get(label)
                hit_b = arcs_b.get(label)
                if hit_a is None or hit_b is None:
                    continue
                cost = _merge_cost(hit_a[0], hit_b[0], a.cost_arity, b.cost_arity)
                dst = (hit_a[1], hit_b[1])
                slot[label] = (cost, dst)
                next_frontier.add(dst)
            if slot:
                layer[pair] = slot
        frontier = next_frontier
        if not frontier:
            break
    return reduce_mdd(normalize(a.layer_count, arity, (0, 0), outgoing))


def dump_mdd(m: Mdd) -> str:
    """Versioned JSON dump; logically lossless (see load_mdd)."""
    labels = sorted({arc[1] for layer in m._arcs for arc in layer}, key=_label_key)
    index = {label: i for i, label in enumerate(labels)}
    arcs = [
        [[src, index[label], list(cost), dst] for src, label, cost, dst in layer]
        for layer in m._arcs
    ]
    doc = {
        "version": _FORMAT_VERSION,
        "layerCount": m.layer_count,
        "costArity": m.cost_arity,
        "widths": list(m._widths),
        "labels": labels,
        "arcs": arcs,
    }
    return json.dumps(doc, ensure_ascii=False)


def load_mdd(text: str) -> Mdd:
    doc = json.loads(text)
    if doc.get("version") != _FORMAT_VERSION:
        raise ShapeError(f"unsupported dump version {doc.get('version')!r}")
    labels = doc["labels"]
    arcs = tuple(
        tuple(
            (src, labels[label_idx], tuple(cost), dst)
            for src, label_idx, cost, dst in layer
        )
        for layer in doc["arcs"]
    )
    return Mdd(doc["layerCount"], doc["costArity"], tuple(doc["widths"]), arcs)


def save_mdd(m: Mdd, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_mdd(m) + "\n")


def load_mdd_file(path) -> Mdd:
    with open(path, encoding="utf-8") as handle:
        return load_mdd(handle.read())
