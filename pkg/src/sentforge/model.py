"""Declarative sentence constraint models and the independent validator.

A model fixes the variable count, the n-gram chaining order, character
knapsacks over index windows, an optional exact syllable total, per-index
unary rules, and the line layout used for rendering. The standardized
reading-chart presets live here, as does ``validate_sentence`` — the oracle
that rechecks a finished sentence constraint by constraint without touching
the compiler.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import ModelConfigError, ShapeError
from .lexicon import COMMA, Lexicon, char_count, syllable_count
from .ngram_index import NgramIndex

Token = str


@dataclass(frozen=True)
class UnaryRule:
    """Per-variable restriction: character/syllable bounds or a fixed token."""

    char_min: int = 0
    char_max: int | None = None
    syll_min: int = 0
    syll_max: int | None = None
    fixed_token: Token | None = None

    def allows(self, token: Token, lexicon: Lexicon) -> bool:
        if self.fixed_token is not None and token != self.fixed_token:
            return False
        chars = char_count(token)
        if chars < self.char_min:
            return False
        if self.char_max is not None and chars > self.char_max:
            return False
        sylls = syllable_count(token, lexicon)
        if sylls < self.syll_min:
            return False
        if self.syll_max is not None and sylls > self.syll_max:
            return False
        return True

    def describe(self) -> str:
        parts = []
        if self.fixed_token is not None:
            parts.append(f"token={self.fixed_token!r}")
        if self.char_min or self.char_max is not None:
            hi = "*" if self.char_max is None else self.char_max
            parts.append(f"chars[{self.char_min}..{hi}]")
        if self.syll_min or self.syll_max is not None:
            hi = "*" if self.syll_max is None else self.syll_max
            parts.append(f"sylls[{self.syll_min}..{hi}]")
        return " ".join(parts) or "free"


@dataclass(frozen=True)
class CharKnapsack:
    """Bounded character sum over variables start..end (1-based, inclusive)."""

    start: int
    end: int
    min_chars: int
    max_chars: int


@dataclass(frozen=True)
class ConstraintModel:
    variable_count: int
    chaining_order: int
    char_knapsacks: tuple[CharKnapsack, ...]
    syllable_sum: int | None
    unary: dict[int, UnaryRule] = field(default_factory=dict)
    line_breaks: tuple[int, ...] = ()

    def line_starts(self) -> frozenset[int]:
        """1-based variable indices that open a rendered line."""
        starts = {1}
        starts.update(b + 1 for b in self.line_breaks[:-1])
        return frozenset(starts)

    def token_char_cost(self, position: int, token: Token) -> int:
        """Rendered character cost of placing ``token`` at ``position``.

        Space accounting: every token pays for the space before it except
        line-opening tokens and the comma, which attaches to the previous
        word.
        """
        base = char_count(token)
        if position in self.line_starts() or token == COMMA:
            return base
        return base + 1


def validate_model(m: ConstraintModel) -> list[str]:
    """All schema violations, empty when the model is well formed."""
    errors = []
    n = m.variable_count
    if n < 1:
        errors.append(f"variable count must be >= 1, got {n}")
    if m.chaining_order < 2:
        errors.append(f"chaining order must be >= 2, got {m.chaining_order}")
    elif n >= 1 and m.chaining_order > n:
        errors.append(
            f"chaining order {m.chaining_order} exceeds variable count {n}"
        )
    for ks in m.char_knapsacks:
        if not (1 <= ks.start <= ks.end <= n):
            errors.append(
                f"knapsack window [{ks.start}..{ks.end}] out of range for {n} variables"
            )
        if ks.min_chars > ks.max_chars:
            errors.append(
                f"knapsack [{ks.start}..{ks.end}] has min {ks.min_chars} > max {ks.max_chars}"
            )
        if ks.min_chars < 0:
            errors.append(f"knapsack [{ks.start}..{ks.end}] has negative minimum")
    if m.syllable_sum is not None and m.syllable_sum < 0:
        errors.append(f"syllable sum must be >= 0, got {m.syllable_sum}")
    if not m.line_breaks:
        errors.append("lineBreaks must not be empty")
    else:
        if list(m.line_breaks) != sorted(set(m.line_breaks)):
            errors.append("lineBreaks must be strictly increasing")
        if any(b < 1 or b > n for b in m.line_breaks):
            errors.append("lineBreaks must lie within 1..variable count")
        if m.line_breaks[-1] != n:
            errors.append(
                f"last line break must equal the variable count {n}, "
                f"got {m.line_breaks[-1]}"
            )
    for idx, rule in m.unary.items():
        if not (1 <= idx <= n):
            errors.append(f"unary index {idx} out of range for {n} variables")
        if rule.char_min < 0 or rule.syll_min < 0:
            errors.append(f"unary[{idx}] has negative bounds")
        if rule.char_max is not None and rule.char_min > rule.char_max:
            errors.append(f"unary[{idx}] has charMin > charMax")
        if rule.syll_max is not None and rule.syll_min > rule.syll_max:
            errors.append(f"unary[{idx}] has syllMin > syllMax")
        if rule.fixed_token is not None:
            chars = char_count(rule.fixed_token)
            if chars < rule.char_min or (
                rule.char_max is not None and chars > rule.char_max
            ):
                errors.append(
                    f"unary[{idx}] fixed token {rule.fixed_token!r} breaks its char bounds"
                )
            if rule.fixed_token == COMMA and rule.syll_min > 0:
                errors.append(f"unary[{idx}] fixes the comma but requires syllables")
    return errors


# --- standardized reading-chart presets -----------------------------------

RADNER_VARIANTS = ("core", "german", "spanish", "portuguese")

# language variants harden the first-word character bounds; the core rule
# (at most 4 characters) relaxes all of them
_FIRST_WORD_CHARS = {
    "core": (0, 4),
    "german": (3, 3),
    "spanish": (2, 3),
    "portuguese": (1, 3),
}


def radner_variant_unary(variant: str) -> dict[int, UnaryRule]:
    """The per-variant hardening of the first-word rule; empty for core."""
    if variant not in RADNER_VARIANTS:
        raise ModelConfigError(
            f"unknown variant {variant!r}, expected one of {RADNER_VARIANTS}"
        )
    if variant == "core":
        return {}
    lo, hi = _FIRST_WORD_CHARS[variant]
    return {1: UnaryRule(char_min=lo, char_max=hi, syll_min=1, syll_max=1)}


def preset_radner(variant: str = "core", chaining_order: int = 4) -> ConstraintModel:
    """Reading-chart sentence model: 15 variables over 3 lines.

    Three rendered lines of 27-29 characters (ending after variables 5, 11
    and 15), 82-84 characters overall, exactly 23 syllables, a comma fixed at
    variable 8, and per-word character/syllable rules. ``variant`` hardens
    the first-word character bounds for the German, Spanish or Portuguese
    chart conventions.
    """
    if variant not in RADNER_VARIANTS:
        raise ModelConfigError(
            f"unknown variant {variant!r}, expected one of {RADNER_VARIANTS}"
        )
    first_lo, first_hi = _FIRST_WORD_CHARS[variant]
    unary = {
        1: UnaryRule(char_min=first_lo, char_max=first_hi, syll_min=1, syll_max=1),
        2: UnaryRule(char_max=6, syll_min=2, syll_max=2),
        3: UnaryRule(char_max=7, syll_min=2, syll_max=2),
        6: UnaryRule(char_max=4, syll_min=1, syll_max=1),
        7: UnaryRule(char_min=10, char_max=10, syll_min=4, syll_max=4),
        8: UnaryRule(fixed_token=COMMA),
        9: UnaryRule(syll_min=1, syll_max=1),
        10: UnaryRule(syll_min=1, syll_max=1),
        11: UnaryRule(syll_min=1, syll_max=1),
        12: UnaryRule(syll_min=2, syll_max=2),
        13: UnaryRule(syll_min=2, syll_max=2),
        14: UnaryRule(syll_min=2, syll_max=3),
        15: UnaryRule(syll_min=2, syll_max=3),
    }
    return ConstraintModel(
        variable_count=15,
        chaining_order=chaining_order,
        char_knapsacks=(
            CharKnapsack(1, 5, 27, 29),
            CharKnapsack(6, 11, 27, 29),
            CharKnapsack(12, 15, 27, 29),
            CharKnapsack(1, 15, 82, 84),
        ),
        syllable_sum=23,
        unary=unary,
        line_breaks=(5, 11, 15),
    )


# --- config round-trip -----------------------------------------------------

_TOP_KEYS = {"variables", "chainingOrder", "charKnapsacks", "syllableSum",
             "unary", "lineBreaks"}
_UNARY_KEYS = {"charMin", "charMax", "syllMin", "syllMax", "fixedToken"}


def parse_model(text: str) -> ConstraintModel:
    """Parse the JSON model document; raises ModelConfigError with details."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelConfigError(f"malformed model config: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelConfigError("model config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ModelConfigError(f"unknown model key(s): {', '.join(sorted(unknown))}")
    missing = {"variables", "chainingOrder", "lineBreaks"} - set(doc)
    if missing:
        raise ModelConfigError(f"missing model key(s): {', '.join(sorted(missing))}")
    unary = {}
    for raw_idx, spec in (doc.get("unary") or {}).items():
        try:
            idx = int(raw_idx)
        except ValueError:
            raise ModelConfigError(f"unary index {raw_idx!r} is not an integer") from None
        if not isinstance(spec, dict):
            raise ModelConfigError(f"unary[{idx}] must be an object")
        bad = set(spec) - _UNARY_KEYS
        if bad:
            raise ModelConfigError(
                f"unknown unary key(s) at index {idx}: {', '.join(sorted(bad))}"
            )
        unary[idx] = UnaryRule(
            char_min=spec.get("charMin", 0),
            char_max=spec.get("charMax"),
            syll_min=spec.get("syllMin", 0),
            syll_max=spec.get("syllMax"),
            fixed_token=spec.get("fixedToken"),
        )
    knapsacks = []
    for row in doc.get("charKnapsacks") or []:
        if not (isinstance(row, list) and len(row) == 4):
            raise ModelConfigError(
                "each charKnapsacks entry must be [start, end, min, max]"
            )
        knapsacks.append(CharKnapsack(*row))
    model = ConstraintModel(
        variable_count=doc["variables"],
        chaining_order=doc["chainingOrder"],
        char_knapsacks=tuple(knapsacks),
        syllable_sum=doc.get("syllableSum"),
        unary=unary,
        line_breaks=tuple(doc.get("lineBreaks") or ()),
    )
    errors = validate_model(model)
    if errors:
        raise ModelConfigError("; ".join(errors))
    return model


def serialize_model(m: ConstraintModel) -> str:
    unary = {}
    for idx in sorted(m.unary):
        rule = m.unary[idx]
        spec = {}
        if rule.char_min:
            spec["charMin"] = rule.char_min
        if rule.char_max is not None:
            spec["charMax"] = rule.char_max
        if rule.syll_min:
            spec["syllMin"] = rule.syll_min
        if rule.syll_max is not None:
            spec["syllMax"] = rule.syll_max
        if rule.fixed_token is not None:
            spec["fixedToken"] = rule.fixed_token
        unary[str(idx)] = spec
    doc = {
        "variables": m.variable_count,
        "chainingOrder": m.chaining_order,
        "charKnapsacks": [
            [ks.start, ks.end, ks.min_chars, ks.max_chars] for ks in m.char_knapsacks
        ],
        "syllableSum": m.syllable_sum,
        "unary": unary,
        "lineBreaks": list(m.line_breaks),
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_model_file(path) -> ConstraintModel:
    with open(path, encoding="utf-8") as handle:
        return parse_model(handle.read())


# --- rendering -------------------------------------------------------------

def render_sentence(tokens: Sequence[Token], line_breaks: Sequence[int],
                    ) -> tuple[list[str], list[int], int]:
    """Join tokens into display lines.

    Tokens are space-separated except the comma, which attaches to the
    preceding word. Returns (lines, per-line lengths, total length); line
    separators are not counted.
    """
    if not line_breaks or line_breaks[-1] != len(tokens):
        raise ShapeError(
            f"{len(tokens)} tokens do not fill line breaks {list(line_breaks)}"
        )
    lines = []
    prev = 0
    for brk in line_breaks:
        chunk = tokens[prev:brk]
        if not chunk:
            raise ShapeError(f"empty line at break {brk}")
        parts = [chunk[0]]
        for token in chunk[1:]:
            parts.append(token if token == COMMA else " " + token)
        lines.append("".join(parts))
        prev = brk
    counts = [len(line) for line in lines]
    return lines, counts, sum(counts)


def render_plain(tokens: Sequence[Token]) -> str:
    """Single-line rendering used for solution files and scorer input."""
    return render_sentence(tokens, (len(tokens),))[0][0]


# --- the independent validator ---------------------------------------------

@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    measured: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def overall(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[ConstraintCheck]:
        return [check for check in self.checks if not check.passed]

    def to_tsv(self) -> str:
        rows = [
            f"{check.name}\t{'pass' if check.passed else 'FAIL'}\t{check.measured}"
            for check in self.checks
        ]
        return "\n".join(rows) + "\n"


def _window_chars(m: ConstraintModel, tokens: Sequence[Token],
                  ks: CharKnapsack, line_counts: list[int], total: int) -> int:
    # line-aligned windows read the rendered lengths straight off the text
    if (ks.start, ks.end) == (1, m.variable_count):
        return total
    prev = 0
    for j, brk in enumerate(m.line_breaks):
        if (ks.start, ks.end) == (prev + 1, brk):
            return line_counts[j]
        prev = brk
    return sum(
        m.token_char_cost(i, tokens[i - 1]) for i in range(ks.start, ks.end + 1)
    )


def validate_sentence(m: ConstraintModel, tokens: Sequence[Token],
                      index: NgramIndex, lexicon: Lexicon) -> ValidationReport:
    """Recheck every model constraint on a finished sentence.

    This is deliberately independent of the compiler: chaining is answered by
    the index, character windows by the rendered text, syllables and unary
    rules by the lexicon. Failures become report entries, never exceptions.
    """
    n = m.variable_count
    k = m.chaining_order
    if len(tokens) != n:
        raise ShapeError(f"expected {n} tokens, got {len(tokens)}")
    tokens = tuple(tokens)
    checks = []

    first = tokens[:k]
    checks.append(ConstraintCheck("ngram-start", index.is_start(first), " ".join(first)))
    missing = [
        i for i in range(n - k + 1) if not index.contains(tokens[i : i + k])
    ]
    measured = (
        f"all {n - k + 1} windows stored"
        if not missing
        else "missing: " + " ".join(tokens[missing[0] : missing[0] + k])
    )
    checks.append(ConstraintCheck("ngram-chain", not missing, measured))
    last = tokens[-k:]
    checks.append(ConstraintCheck("ngram-end", index.is_end(last), " ".join(last)))

    _, line_counts, total = render_sentence(tokens, m.line_breaks)
    for ks in m.char_knapsacks:
        value = _window_chars(m, tokens, ks, line_counts, total)
        checks.append(
            ConstraintCheck(
                f"chars[{ks.start}..{ks.end}]",
                ks.min_chars <= value <= ks.max_chars,
                f"{value} in [{ks.min_chars},{ks.max_chars}]",
            )
        )

    if m.syllable_sum is not None:
        sylls = sum(syllable_count(t, lexicon) for t in tokens)
        checks.append(
            ConstraintCheck(
                "syllables", sylls == m.syllable_sum, f"{sylls} == {m.syllable_sum}"
            )
        )

    for idx in sorted(m.unary):
        rule = m.unary[idx]
        token = tokens[idx - 1]
        checks.append(
            ConstraintCheck(
                f"unary[{idx}]",
                rule.allows(token, lexicon),
                f"{token!r} chars={char_count(token)} "
                f"sylls={syllable_count(token, lexicon)} rule={rule.describe()}",
            )
        )
    return ValidationReport(tuple(checks))
