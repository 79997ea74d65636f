"""sentforge: exhaustive constrained sentence generation.

Corpus n-grams are indexed in a trie, a declarative constraint model
(chaining, character knapsacks, syllable meter, per-position rules) is
compiled into a reduced cost-MDD by on-the-fly intersection, every solution
is enumerated, and the results are ranked by perplexity.
"""

from .compiler import CompileStats, compile_model, refine, remaining_cost_bounds
from .corpus import (
    NgramRecord,
    extract_ngrams,
    filter_ngrams,
    read_corpus,
    read_ngram_tsv,
    tokenize_sentence,
    write_ngram_tsv,
)
from .curation import (
    NgramLanguageModel,
    PipeScorer,
    ScoredSentence,
    TcpScorer,
    ppl,
    rank,
    score_external,
    score_with_lm,
    train_ngram_lm,
)
from .errors import (
    ArityError,
    EmptySentenceError,
    InvalidOrderError,
    LexiconError,
    MemoryGuardExceeded,
    ModelConfigError,
    ScorerError,
    SentforgeError,
    ShapeError,
)
from .lexicon import Lexicon, build_lexicon, char_count, load_lexicon, syllable_count
from .mdd import (
    Mdd,
    build_from_tuples,
    count_solutions,
    dump_mdd,
    enumerate_paths,
    intersect,
    layer_widths,
    load_mdd,
    reduce_mdd,
)
from .model import (
    CharKnapsack,
    ConstraintModel,
    UnaryRule,
    ValidationReport,
    parse_model,
    preset_radner,
    render_plain,
    render_sentence,
    serialize_model,
    validate_model,
    validate_sentence,
)
from .ngram_index import NgramIndex, build_index

__version__ = "0.1.0"
