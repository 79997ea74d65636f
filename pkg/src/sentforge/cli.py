"""Batch pipeline driver: extract, solve, rank, run, verify.

Every stage reads and writes plain files (text and TSV) so runs can be
composed, audited and diffed. Exit codes: 0 success (zero solutions
included), 1 failed verification, 2 usage or config error, 3 I/O error,
4 memory-guard abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .compiler import CompileStats, compile_model, refine
from .curation import (
    PipeScorer,
    TcpScorer,
    rank,
    score_external,
    score_with_lm,
    train_ngram_lm,
    write_ranked_tsv,
)
from .errors import (
    MemoryGuardExceeded,
    ModelConfigError,
    ScorerError,
    SentforgeError,
)
from .lexicon import Lexicon, load_lexicon
from .mdd import count_solutions, iter_paths, save_mdd
from .model import (
    ConstraintModel,
    load_model_file,
    preset_radner,
    radner_variant_unary,
    render_plain,
    validate_sentence,
)
from .ngram_index import build_index

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_MEMORY = 4


# --- stages (shared by the stage commands and `run`) ------------------------

def stage_extract(corpus_path, order: int, lexicon: Lexicon, out_path,
                  ) -> tuple[list, int]:
    """Tokenize, extract, filter, write the n-gram TSV."""
    sentences = corpus_mod.read_corpus(corpus_path)
    records = corpus_mod.extract_ngrams(sentences, order)
    skipped = corpus_mod.count_short_sentences(sentences, order)
    filtered = corpus_mod.filter_ngrams(records, lexicon)
    corpus_mod.write_ngram_tsv(filtered, out_path)
    return filtered, skipped


def stage_solve(records, model: ConstraintModel, lexicon: Lexicon,
                solutions_path, stats_path, widths_path=None, mdd_path=None,
                max_states=None, refine_extras=None) -> CompileStats:
    """Compile (optionally refine), enumerate and write all artifacts."""
    index = build_index(records, order=model.chaining_order)
    mdd, stats = compile_model(model, index, lexicon, max_states=max_states)
    if refine_extras:
        mdd = refine(mdd, refine_extras, lexicon)
        stats = CompileStats(
            layer_nodes=mdd.layer_widths(),
            layer_arcs=[len(mdd.arcs_in_layer(i)) for i in range(mdd.layer_count)],
            peak_states=stats.peak_states,
            seconds=stats.seconds,
            solutions=count_solutions(mdd),
        )
    with open(solutions_path, "w", encoding="utf-8") as handle:
        for labels, _cost in iter_paths(mdd):
            handle.write(render_plain(labels) + "\n")
    with open(stats_path, "w", encoding="utf-8") as handle:
        handle.write(stats.to_tsv())
    if widths_path:
        with open(widths_path, "w", encoding="utf-8") as handle:
            handle.write("layer\twidth\n")
            for i, width in enumerate(mdd.layer_widths()):
                handle.write(f"{i}\t{width}\n")
    if mdd_path:
        save_mdd(mdd, mdd_path)
    return stats


def stage_rank(solutions_path, out_path, scorer: dict, records=None,
               top_k=None, max_ppl=None) -> int:
    """Score the solutions file and write the ranked TSV."""
    with open(solutions_path, encoding="utf-8") as handle:
        sentences = [line.rstrip("\n") for line in handle if line.strip()]
    kind = scorer.get("type", "builtin")
    if kind == "builtin":
        if not records:
            raise ModelConfigError("builtin scorer needs the n-gram records")
        lm = train_ngram_lm(records, k_add=scorer.get("kAdd", 1.0))
        scored = score_with_lm(lm, sentences)
    elif kind == "external":
        timeout = scorer.get("timeout", 120.0)
        if scorer.get("command"):
            client = PipeScorer(scorer["command"], timeout=timeout)
        elif scorer.get("endpoint"):
            host, _, port = scorer["endpoint"].rpartition(":")
            if not host or not port.isdigit():
                raise ModelConfigError(
                    f"endpoint must be host:port, got {scorer['endpoint']!r}"
                )
            client = TcpScorer(host, int(port), timeout=timeout)
        else:
            raise ModelConfigError("external scorer needs a command or endpoint")
        try:
            scored = score_external(client, sentences)
        finally:
            client.close()
    else:
        raise ModelConfigError(f"unknown scorer type {kind!r}")
    if max_ppl is not None:
        scored = [s for s in scored if s.ppl <= max_ppl]
    ranked = rank(scored, top_k)
    write_ranked_tsv(ranked, out_path)
    return len(ranked)


def stage_verify(solutions_path, model: ConstraintModel, records,
                 lexicon: Lexicon) -> list[tuple[int, str, list[str]]]:
    """Re-validate every solution line; returns (lineno, text, failures)."""
    index = build_index(records, order=model.chaining_order)
    problems = []
    with open(solutions_path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            text = line.rstrip("\n")
            if not text.strip():
                continue
            tokens = corpus_mod.tokenize_sentence(text)
            report = validate_sentence(model, tokens, index, lexicon)
            if not report.overall:
                problems.append(
                    (lineno, text, [c.name for c in report.failures()])
                )
    return problems


# --- model/lexicon resolution ----------------------------------------------

def _load_lexicon(args) -> Lexicon:
    return load_lexicon(args.wordlist, getattr(args, "overrides", None))


def _resolve_model(preset: str | None, variant: str, model_path,
                   order: int, refine_path: bool,
                   ) -> tuple[ConstraintModel, dict | None]:
    """Pick the model to compile plus optional post-compile hardening."""
    if model_path:
        return load_model_file(model_path), None
    if preset != "radner":
        raise ModelConfigError(f"unknown preset {preset!r}")
    if refine_path and variant != "core":
        return preset_radner("core", order), radner_variant_unary(variant)
    return preset_radner(variant, order), None


def _records_order(records) -> int:
    if not records:
        raise ModelConfigError("the n-gram file holds no records")
    return len(records[0].tokens)


# --- subcommands -------------------------------------------------------------

def cmd_extract(args) -> int:
    lexicon = _load_lexicon(args)
    records, skipped = stage_extract(args.corpus, args.order, lexicon, args.out)
    print(f"records={len(records)} skipped={skipped}")
    return EXIT_OK


def cmd_solve(args) -> int:
    lexicon = _load_lexicon(args)
    records = corpus_mod.read_ngram_tsv(args.ngrams)
    order = _records_order(records)
    model, extras = _resolve_model(
        args.preset, args.variant, args.model, order, refine_path=False
    )
    try:
        stats = stage_solve(
            records, model, lexicon,
            solutions_path=args.out, stats_path=args.stats,
            widths_path=args.widths, mdd_path=args.mdd_out,
            max_states=args.max_states, refine_extras=extras,
        )
    except MemoryGuardExceeded as exc:
        if exc.partial_stats is not None:
            with open(args.stats, "w", encoding="utf-8") as handle:
                handle.write(exc.partial_stats.to_tsv())
        print(f"memory guard: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    print(
        f"nodes={stats.total_nodes()} arcs={stats.total_arcs()} "
        f"solutions={stats.solutions} seconds={stats.seconds:.3f}"
    )
    return EXIT_OK


def cmd_rank(args) -> int:
    scorer: dict = {"type": args.scorer}
    if args.scorer == "builtin":
        if not args.ngrams:
            raise ModelConfigError("--ngrams is required with the builtin scorer")
        scorer["kAdd"] = args.k_add
        records = corpus_mod.read_ngram_tsv(args.ngrams)
    else:
        records = None
        scorer["command"] = args.command
        scorer["endpoint"] = args.endpoint
        scorer["timeout"] = args.timeout
    count = stage_rank(
        args.solutions, args.out, scorer, records, args.top_k, args.max_ppl
    )
    print(f"ranked={count}")
    return EXIT_OK


_RUN_KEYS = {"corpus", "order", "wordlist", "overrides", "model", "preset",
             "variant", "outDir", "topK", "maxPpl", "scorer", "maxStates"}
_SCORER_KEYS = {"type", "kAdd", "command", "endpoint", "timeout"}


def _load_run_config(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        try:
            cfg = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ModelConfigError(f"malformed config: {exc}") from None
    if not isinstance(cfg, dict):
        raise ModelConfigError("config must be a JSON object")
    unknown = set(cfg) - _RUN_KEYS
    if unknown:
        raise ModelConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    missing = {"corpus", "order", "wordlist", "outDir"} - set(cfg)
    if missing:
        raise ModelConfigError(f"missing config key(s): {', '.join(sorted(missing))}")
    scorer = cfg.get("scorer", {"type": "builtin"})
    if not isinstance(scorer, dict):
        raise ModelConfigError("scorer must be a JSON object")
    bad = set(scorer) - _SCORER_KEYS
    if bad:
        raise ModelConfigError(f"unknown scorer key(s): {', '.join(sorted(bad))}")
    cfg["scorer"] = scorer
    return cfg


def cmd_run(args) -> int:
    cfg = _load_run_config(args.config)
    out_dir = Path(cfg["outDir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    lexicon = load_lexicon(cfg["wordlist"], cfg.get("overrides"))

    records, skipped = stage_extract(
        cfg["corpus"], cfg["order"], lexicon, out_dir / "ngrams.tsv"
    )
    print(f"records={len(records)} skipped={skipped}")

    model, extras = _resolve_model(
        cfg.get("preset", "radner"), cfg.get("variant", "core"),
        cfg.get("model"), cfg["order"], refine_path=True,
    )
    try:
        stats = stage_solve(
            records, model, lexicon,
            solutions_path=out_dir / "solutions.txt",
            stats_path=out_dir / "stats.tsv",
            widths_path=out_dir / "widths.tsv",
            max_states=cfg.get("maxStates"),
            refine_extras=extras,
        )
    except MemoryGuardExceeded as exc:
        if exc.partial_stats is not None:
            with open(out_dir / "stats.tsv", "w", encoding="utf-8") as handle:
                handle.write(exc.partial_stats.to_tsv())
        print(f"memory guard: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    print(
        f"nodes={stats.total_nodes()} arcs={stats.total_arcs()} "
        f"solutions={stats.solutions} seconds={stats.seconds:.3f}"
    )

    count = stage_rank(
        out_dir / "solutions.txt", out_dir / "ranked.tsv",
        cfg["scorer"], records, cfg.get("topK"), cfg.get("maxPpl"),
    )
    print(f"ranked={count}")
    return EXIT_OK


def cmd_verify(args) -> int:
    lexicon = _load_lexicon(args)
    records = corpus_mod.read_ngram_tsv(args.ngrams)
    order = _records_order(records)
    model, _ = _resolve_model(
        args.preset, args.variant, args.model, order, refine_path=False
    )
    problems = stage_verify(args.solutions, model, records, lexicon)
    if problems:
        for lineno, text, names in problems:
            print(f"line {lineno}: FAIL {','.join(names)}: {text}")
        print(f"failures={len(problems)}")
        return EXIT_VERIFY_FAILED
    print("all sentences pass")
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentforge",
        description="Compile sentence constraint models to decision diagrams, "
                    "enumerate every solution, rank by perplexity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_lexicon_flags(p):
        p.add_argument("--wordlist", required=True, help="allowed words, one per line")
        p.add_argument("--overrides", help="syllable override TSV (token, count)")

    def add_model_flags(p):
        p.add_argument("--model", help="model config JSON (overrides --preset)")
        p.add_argument("--preset", default="radner", help="built-in model family")
        p.add_argument(
            "--variant", default="core",
            choices=("core", "german", "spanish", "portuguese"),
        )

    p = sub.add_parser("extract", help="corpus -> filtered n-gram TSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, required=True)
    add_lexicon_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("solve", help="n-grams + model -> all solutions")
    p.add_argument("--ngrams", required=True)
    add_model_flags(p)
    add_lexicon_flags(p)
    p.add_argument("--out", required=True, help="solutions file, one per line")
    p.add_argument("--stats", required=True, help="per-layer stats TSV")
    p.add_argument("--widths", help="layer width TSV for plotting")
    p.add_argument("--mdd-out", help="serialized diagram dump")
    p.add_argument("--max-states", type=int, help="memory guard on layer states")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("rank", help="solutions -> perplexity-ranked TSV")
    p.add_argument("--solutions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scorer", choices=("builtin", "external"), default="builtin")
    p.add_argument("--ngrams", help="records to train the builtin scorer on")
    p.add_argument("--k-add", type=float, default=1.0)
    p.add_argument("--command", help="external scorer argv (pipe mode)")
    p.add_argument("--endpoint", help="external scorer host:port (TCP mode)")
    p.add_argument("--timeout", type=float, default=120.0)
    p.add_argument("--top-k", type=int)
    p.add_argument("--max-ppl", type=float, help="drop sentences scoring above this")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("run", help="end-to-end pipeline from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="audit a solutions file against a model")
    p.add_argument("--solutions", required=True)
    p.add_argument("--ngrams", required=True)
    add_model_flags(p)
    add_lexicon_flags(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelConfigError, SentforgeError) as exc:
        if isinstance(exc, MemoryGuardExceeded):
            print(f"memory guard: {exc}", file=sys.stderr)
            return EXIT_MEMORY
        if isinstance(exc, ScorerError):
            print(f"scorer error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
