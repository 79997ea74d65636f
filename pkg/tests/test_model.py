import random

import pytest

from sentforge.corpus import tokenize_sentence
from sentforge.errors import ModelConfigError, ShapeError
from sentforge.lexicon import build_lexicon
from sentforge.model import (
    CharKnapsack,
    ConstraintModel,
    UnaryRule,
    parse_model,
    preset_radner,
    radner_variant_unary,
    render_plain,
    render_sentence,
    serialize_model,
    validate_model,
    validate_sentence,
)

VALID_SEED = "But after nearly three weeks of television, they had been feeling rather oddly worried."


def test_core_preset_shape():
    m = preset_radner("core")
    assert m.variable_count == 15
    assert m.line_breaks == (5, 11, 15)
    assert m.syllable_sum == 23
    assert m.char_knapsacks == (
        CharKnapsack(1, 5, 27, 29),
        CharKnapsack(6, 11, 27, 29),
        CharKnapsack(12, 15, 27, 29),
        CharKnapsack(1, 15, 82, 84),
    )
    assert validate_model(m) == []


def test_core_preset_unary_values():
    m = preset_radner("core")
    seven = m.unary[7]
    assert (seven.char_min, seven.char_max) == (10, 10)
    assert (seven.syll_min, seven.syll_max) == (4, 4)
    assert m.unary[8].fixed_token == ","
    assert m.unary[1].char_max == 4
    assert (m.unary[14].syll_min, m.unary[14].syll_max) == (2, 3)
    assert 4 not in m.unary and 5 not in m.unary


def test_variant_hardening_of_first_word():
    german = preset_radner("german").unary[1]
    assert (german.char_min, german.char_max) == (3, 3)
    assert (german.syll_min, german.syll_max) == (1, 1)
    spanish = preset_radner("spanish").unary[1]
    assert (spanish.char_min, spanish.char_max) == (2, 3)
    portuguese = preset_radner("portuguese").unary[1]
    assert (portuguese.char_min, portuguese.char_max) == (1, 3)


def test_variants_differ_from_core_only_at_index_one():
    core = preset_radner("core")
    for variant in ("german", "spanish", "portuguese"):
        m = preset_radner(variant)
        assert {i: r for i, r in m.unary.items() if i != 1} == {
            i: r for i, r in core.unary.items() if i != 1
        }
        assert m.char_knapsacks == core.char_knapsacks
        assert radner_variant_unary(variant) == {1: m.unary[1]}
    assert radner_variant_unary("core") == {}


def test_variant_accepts_subset_of_core_tokens():
    # hardened first-word rules accept a subset of what core accepts
    lex = build_lexicon({"A", "My", "But", "Just", "Their"})
    core = preset_radner("core").unary[1]
    for variant in ("german", "spanish", "portuguese"):
        rule = preset_radner(variant).unary[1]
        for token in lex.allowed:
            if rule.allows(token, lex):
                assert core.allows(token, lex)


def test_unknown_variant_and_preset_errors():
    with pytest.raises(ModelConfigError):
        preset_radner("english")
    with pytest.raises(ModelConfigError):
        radner_variant_unary("english")


def test_serialize_parse_round_trip():
    core = preset_radner("core")
    assert parse_model(serialize_model(core)) == core
    toy = ConstraintModel(6, 3, (CharKnapsack(1, 6, 20, 25),), 8, {}, (6,))
    assert parse_model(serialize_model(toy)) == toy


def test_parse_rejects_bad_documents():
    with pytest.raises(ModelConfigError):
        parse_model("{not json")
    with pytest.raises(ModelConfigError):
        parse_model('{"variables": 15}')  # missing keys
    with pytest.raises(ModelConfigError):
        parse_model(
            '{"variables": 15, "chainingOrder": 4, "lineBreaks": [5, 11, 15],'
            ' "knapsackz": []}'
        )


def test_validate_model_catches_range_errors():
    base = preset_radner("core")
    bad = ConstraintModel(
        15, 4, base.char_knapsacks + (CharKnapsack(12, 16, 1, 2),),
        23, base.unary, (5, 11, 15),
    )
    assert any("out of range" in e for e in validate_model(bad))
    bad = ConstraintModel(15, 4, base.char_knapsacks, 23, base.unary, (5, 11, 14))
    assert any("last line break" in e for e in validate_model(bad))
    bad = ConstraintModel(15, 4, (CharKnapsack(1, 5, 9, 3),), 23, {}, (5, 11, 15))
    assert any("min" in e for e in validate_model(bad))
    bad = ConstraintModel(3, 4, (), None, {}, (3,))
    assert any("chaining order" in e for e in validate_model(bad))


def test_render_joins_with_comma_attached():
    tokens = ["The", "black", "dog", ",", "who", "ran"]
    lines, counts, total = render_sentence(tokens, (6,))
    assert lines == ["The black dog, who ran"]
    assert counts == [len("The black dog, who ran")] == [22]
    assert total == 22


def test_render_single_token_line():
    lines, counts, total = render_sentence(["dog"], (1,))
    assert lines == ["dog"] and counts == [3] and total == 3


def test_render_multi_line_splits():
    tokens = tokenize_sentence(VALID_SEED)
    lines, counts, total = render_sentence(tokens, (5, 11, 15))
    assert lines[0] == "But after nearly three weeks"
    assert lines[1] == "of television, they had been"
    assert lines[2] == "feeling rather oddly worried"
    assert counts == [28, 28, 28] and total == 84


def test_render_token_count_mismatch():
    with pytest.raises(ShapeError):
        render_sentence(["a", "b"], (3,))


def test_cost_decomposition_matches_rendered_length():
    # per-token arc costs must reproduce rendered line lengths exactly
    rng = random.Random(5)
    words = ["a", "the", "dog", "kitty", "watches", "television", "x-ray"]
    for _ in range(1000):
        count = rng.randint(1, 12)
        tokens = [
            "," if rng.random() < 0.2 else rng.choice(words) for _ in range(count)
        ]
        breaks = sorted(rng.sample(range(1, count + 1), rng.randint(1, min(3, count))))
        if breaks[-1] != count:
            breaks.append(count)
        model = ConstraintModel(count, 2, (), None, {}, tuple(breaks))
        _, _, total = render_sentence(tokens, tuple(breaks))
        decomposed = sum(
            model.token_char_cost(i, tok) for i, tok in enumerate(tokens, 1)
        )
        assert decomposed == total


def test_validate_sentence_accepts_seed(radner_index, radner_lexicon):
    model = preset_radner("core")
    tokens = tokenize_sentence(VALID_SEED)
    report = validate_sentence(model, tokens, radner_index, radner_lexicon)
    assert report.overall, report.failures()
    names = [c.name for c in report.checks]
    assert names[:3] == ["ngram-start", "ngram-chain", "ngram-end"]
    assert "chars[1..15]" in names and "syllables" in names and "unary[8]" in names


def test_validate_sentence_is_pure(radner_index, radner_lexicon):
    model = preset_radner("core")
    tokens = tokenize_sentence(VALID_SEED)
    a = validate_sentence(model, tokens, radner_index, radner_lexicon)
    b = validate_sentence(model, tokens, radner_index, radner_lexicon)
    assert a == b


def test_validate_sentence_flags_character_perturbation(radner_index, radner_lexicon):
    model = preset_radner("core")
    tokens = tokenize_sentence(VALID_SEED)
    tokens[4] = tokens[4] + "s"  # lengthen a middle word
    report = validate_sentence(model, tokens, radner_index, radner_lexicon)
    failed = {c.name for c in report.failures()}
    assert any(name.startswith("chars[") for name in failed)
    assert not report.overall
    # lengthening the first-line word further must break that line's window
    tokens[4] = tokens[4] + "es"
    report = validate_sentence(model, tokens, radner_index, radner_lexicon)
    assert "chars[1..5]" in {c.name for c in report.failures()}


def test_validate_sentence_flags_displaced_comma(radner_index, radner_lexicon):
    model = preset_radner("core")
    tokens = tokenize_sentence(VALID_SEED)
    tokens[7] = "and"
    report = validate_sentence(model, tokens, radner_index, radner_lexicon)
    assert "unary[8]" in {c.name for c in report.failures()}


def test_validate_sentence_rejects_wrong_arity(radner_index, radner_lexicon):
    with pytest.raises(ShapeError):
        validate_sentence(
            preset_radner("core"), ["too", "short"], radner_index, radner_lexicon
        )


def test_report_tsv_lines(radner_index, radner_lexicon):
    model = preset_radner("core")
    tokens = tokenize_sentence(VALID_SEED)
    report = validate_sentence(model, tokens, radner_index, radner_lexicon)
    rows = report.to_tsv().strip().split("\n")
    assert len(rows) == len(report.checks)
    assert all(len(row.split("\t")) == 3 for row in rows)


def test_render_plain_round_trips_through_tokenizer():
    tokens = tokenize_sentence(VALID_SEED)
    assert tokenize_sentence(render_plain(tokens)) == tokens


def test_unary_rule_allows():
    lex = build_lexicon({"dog", "little"}, {"little": 2})
    assert UnaryRule(char_max=3, syll_min=1, syll_max=1).allows("dog", lex)
    assert not UnaryRule(char_max=2).allows("dog", lex)
    assert not UnaryRule(char_min=4).allows("dog", lex)
    assert UnaryRule(syll_min=2, syll_max=2).allows("little", lex)
    assert UnaryRule(fixed_token=",").allows(",", lex)
    assert not UnaryRule(fixed_token=",").allows("dog", lex)
