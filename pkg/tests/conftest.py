from __future__ import annotations

from pathlib import Path

import pytest

from sentforge.corpus import extract_ngrams, filter_ngrams, read_corpus
from sentforge.lexicon import load_lexicon
from sentforge.model import CharKnapsack, ConstraintModel
from sentforge.ngram_index import build_index

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def toy_lexicon():
    return load_lexicon(DATA / "toy_wordlist.txt", name="toy")


@pytest.fixture(scope="session")
def toy_sentences():
    return read_corpus(DATA / "toy_corpus.txt")


@pytest.fixture(scope="session")
def toy_records(toy_sentences, toy_lexicon):
    return filter_ngrams(extract_ngrams(toy_sentences, 3), toy_lexicon)


@pytest.fixture(scope="session")
def toy_index(toy_records):
    return build_index(toy_records, order=3)


@pytest.fixture(scope="session")
def toy_model():
    """Scaled-down model: 6 variables, one line, 20-25 chars, 8 syllables."""
    return ConstraintModel(
        variable_count=6,
        chaining_order=3,
        char_knapsacks=(CharKnapsack(1, 6, 20, 25),),
        syllable_sum=8,
        unary={},
        line_breaks=(6,),
    )


@pytest.fixture(scope="session")
def radner_lexicon():
    return load_lexicon(
        DATA / "radner_wordlist.txt", DATA / "radner_overrides.tsv", name="radner"
    )


@pytest.fixture(scope="session")
def radner_sentences():
    return read_corpus(DATA / "radner_corpus.txt")


@pytest.fixture(scope="session")
def radner_records(radner_sentences, radner_lexicon):
    return filter_ngrams(extract_ngrams(radner_sentences, 4), radner_lexicon)


@pytest.fixture(scope="session")
def radner_index(radner_records):
    return build_index(radner_records, order=4)
