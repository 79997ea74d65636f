import dataclasses

import pytest

from oracles import brute_force_sentences
from sentforge.compiler import compile_model, refine, remaining_cost_bounds
from sentforge.corpus import extract_ngrams
from sentforge.errors import MemoryGuardExceeded, ModelConfigError, ShapeError
from sentforge.mdd import count_solutions, dump_mdd, enumerate_paths, load_mdd, path_set
from sentforge.model import (
    ConstraintModel,
    UnaryRule,
    preset_radner,
    radner_variant_unary,
    validate_sentence,
)


def test_compile_matches_brute_force_oracle(toy_model, toy_index, toy_lexicon):
    mdd, stats = compile_model(toy_model, toy_index, toy_lexicon)
    expected = brute_force_sentences(toy_model, toy_index, toy_lexicon)
    assert path_set(mdd) == expected
    assert stats.solutions == len(expected)
    assert len(expected) > 0
    mdd.check_invariants()


def test_compiled_costs_match_rendered_counts(toy_model, toy_index, toy_lexicon):
    from sentforge.lexicon import syllable_count
    from sentforge.model import render_sentence

    mdd, _ = compile_model(toy_model, toy_index, toy_lexicon)
    for labels, (chars, sylls) in enumerate_paths(mdd):
        _, _, total = render_sentence(labels, toy_model.line_breaks)
        assert chars == total
        assert sylls == sum(syllable_count(t, toy_lexicon) for t in labels)


def test_windows_of_solutions_exist_in_input_records(toy_model, toy_index,
                                                     toy_lexicon, toy_records):
    # closure: re-extracting n-grams from any output yields known records
    stored = {r.tokens for r in toy_records}
    mdd, _ = compile_model(toy_model, toy_index, toy_lexicon)
    for labels, _ in enumerate_paths(mdd):
        for record in extract_ngrams([list(labels)], 3):
            assert record.tokens in stored


def test_unsatisfiable_unary_yields_empty_diagram(toy_model, toy_index, toy_lexicon):
    blocked = dataclasses.replace(toy_model, unary={1: UnaryRule(char_max=0)})
    mdd, stats = compile_model(blocked, toy_index, toy_lexicon)
    assert stats.solutions == 0
    assert count_solutions(mdd) == 0
    assert enumerate_paths(mdd) == []


def test_start_token_exclusion_yields_empty(toy_model, toy_index, toy_lexicon):
    starters = {g[0] for g in toy_index.start_ngrams()}
    max_len = max(len(t) for t in starters)
    blocked = dataclasses.replace(
        toy_model, unary={1: UnaryRule(char_min=max_len + 1)}
    )
    mdd, stats = compile_model(blocked, toy_index, toy_lexicon)
    assert stats.solutions == 0


def test_core_preset_solutions_all_validate(radner_index, radner_lexicon):
    model = preset_radner("core", 4)
    mdd, stats = compile_model(model, radner_index, radner_lexicon)
    paths = enumerate_paths(mdd)
    assert stats.solutions == len(paths) > 0
    for labels, _ in paths:
        report = validate_sentence(model, labels, radner_index, radner_lexicon)
        assert report.overall, (labels, [c.name for c in report.failures()])


def test_fixed_token_layer_carries_single_label(radner_index, radner_lexicon):
    mdd, _ = compile_model(preset_radner("core", 4), radner_index, radner_lexicon)
    comma_layer_labels = {arc[1] for arc in mdd.arcs_in_layer(7)}
    assert comma_layer_labels == {","}
    # width cannot grow across a single-label layer
    assert mdd.width(8) <= mdd.width(7)


def test_variant_solution_sets_are_nested(radner_index, radner_lexicon):
    sets = {}
    for variant in ("core", "german", "spanish", "portuguese"):
        mdd, _ = compile_model(
            preset_radner(variant, 4), radner_index, radner_lexicon
        )
        sets[variant] = path_set(mdd)
    assert sets["german"] <= sets["spanish"] <= sets["portuguese"] <= sets["core"]
    # the bundled corpus separates all four variants
    assert len(sets["german"]) < len(sets["spanish"]) < len(sets["portuguese"]) < len(sets["core"])


def test_refine_equals_direct_compilation(radner_index, radner_lexicon):
    core_mdd, _ = compile_model(preset_radner("core", 4), radner_index, radner_lexicon)
    for variant in ("german", "spanish", "portuguese"):
        direct, _ = compile_model(
            preset_radner(variant, 4), radner_index, radner_lexicon
        )
        refined = refine(core_mdd, radner_variant_unary(variant), radner_lexicon)
        assert path_set(refined) == path_set(direct)
        assert path_set(refined) <= path_set(core_mdd)


def test_refine_with_toothless_rules_is_identity(radner_index, radner_lexicon):
    core_mdd, _ = compile_model(preset_radner("core", 4), radner_index, radner_lexicon)
    again = refine(core_mdd, {1: preset_radner("core").unary[1]}, radner_lexicon)
    assert again == core_mdd


def test_remaining_bounds_shape(toy_model, toy_index, toy_lexicon):
    bounds = remaining_cost_bounds(toy_model, toy_lexicon, toy_index)
    assert len(bounds) == toy_model.variable_count + 1
    assert bounds[-1] == ((0, 0), (0, 0))
    for (char_lo, char_hi), (syll_lo, syll_hi) in bounds:
        assert char_lo <= char_hi and syll_lo <= syll_hi
    # bounds shrink monotonically toward the terminal
    for earlier, later in zip(bounds, bounds[1:]):
        assert earlier[0][0] >= later[0][0]
        assert earlier[0][1] >= later[0][1]


def test_remaining_bounds_collapse_on_single_token_vocabulary(toy_lexicon):
    records = extract_ngrams([["dog", "dog", "dog", "dog"]], 3)
    from sentforge.ngram_index import build_index

    index = build_index(records, order=3)
    model = ConstraintModel(4, 3, (), None, {}, (4,))
    for (char_lo, char_hi), (syll_lo, syll_hi) in remaining_cost_bounds(
        model, toy_lexicon, index
    ):
        assert char_lo == char_hi
        assert syll_lo == syll_hi


def test_pruning_never_loses_solutions(toy_model, toy_index, toy_lexicon):
    pruned, _ = compile_model(toy_model, toy_index, toy_lexicon)
    unpruned, _ = compile_model(
        toy_model, toy_index, toy_lexicon, feasibility_pruning=False
    )
    assert path_set(pruned) == path_set(unpruned)
    assert pruned == unpruned


def test_compile_is_deterministic(radner_index, radner_lexicon):
    model = preset_radner("core", 4)
    mdd_a, stats_a = compile_model(model, radner_index, radner_lexicon)
    mdd_b, stats_b = compile_model(model, radner_index, radner_lexicon)
    assert mdd_a == mdd_b
    assert stats_a.layer_nodes == stats_b.layer_nodes
    assert stats_a.layer_arcs == stats_b.layer_arcs
    assert stats_a.peak_states == stats_b.peak_states
    assert stats_a.solutions == stats_b.solutions


def test_stats_agree_with_diagram(radner_index, radner_lexicon):
    mdd, stats = compile_model(preset_radner("core", 4), radner_index, radner_lexicon)
    assert stats.layer_nodes == mdd.layer_widths()
    assert stats.layer_arcs == [
        len(mdd.arcs_in_layer(i)) for i in range(mdd.layer_count)
    ]
    assert stats.solutions == count_solutions(mdd)
    assert stats.peak_states >= max(mdd.layer_widths())
    assert stats.seconds >= 0


def test_memory_guard_aborts_with_partial_stats(radner_index, radner_lexicon):
    with pytest.raises(MemoryGuardExceeded) as exc_info:
        compile_model(
            preset_radner("core", 4), radner_index, radner_lexicon, max_states=1
        )
    partial = exc_info.value.partial_stats
    assert partial is not None
    assert partial.solutions is None
    assert partial.peak_states > 1


def test_order_mismatch_raises(radner_index, radner_lexicon):
    with pytest.raises(ShapeError):
        compile_model(preset_radner("core", 3), radner_index, radner_lexicon)


def test_invalid_model_raises(toy_index, toy_lexicon):
    bad = ConstraintModel(6, 3, (), None, {}, (5,))  # last break != N
    with pytest.raises(ModelConfigError):
        compile_model(bad, toy_index, toy_lexicon)


def test_compiled_diagram_survives_serialization(toy_model, toy_index, toy_lexicon):
    mdd, _ = compile_model(toy_model, toy_index, toy_lexicon)
    again = load_mdd(dump_mdd(mdd))
    assert again == mdd
    assert path_set(again) == path_set(mdd)


def test_stats_tsv_has_layer_rows_and_summary(toy_model, toy_index, toy_lexicon):
    _, stats = compile_model(toy_model, toy_index, toy_lexicon)
    lines = stats.to_tsv().strip().split("\n")
    assert lines[0] == "layer\tnodes\tarcs"
    assert len(lines) == toy_model.variable_count + 2
    assert lines[-1].startswith("summary\t")
    summary = lines[-1].split("\t")
    assert summary[1] == str(stats.total_nodes())
    assert summary[3] == str(stats.solutions)
