"""Command-line entry points: train, segment, eval, analyze.

Diagnostics go to stderr and failures exit nonzero; data goes to the
named output files or stdout. The SPANSEG_SEED environment variable
overrides the configured seed for training.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import checkpoint as ckpt_mod
from . import config as config_mod
from . import corpus as corpus_mod
from . import decoder as decoder_mod
from . import report as report_mod
from . import training as training_mod
from .corpus import CHINESE, VIETNAMESE, WORD_SEPS, Corpus, SegmentedSentence
from .crf import CrfModel
from .errors import ConfigError, FormatError
from .evaluate import ambiguity_stats, evaluate
from .model import (
    ENCODER_CHUNKED,
    ScoreTable,
    SentenceFeatures,
    SpanSegConfig,
    SpanSegModel,
)
from .spans import enumerate_spans, spans_to_bies, spans_to_words, words_to_spans

SEED_ENV = "SPANSEG_SEED"

ORACLE_HIGH = 0.99
ORACLE_LOW = 0.01


def _check_language(language: str) -> str:
    if language not in WORD_SEPS:
        raise ConfigError(
            f"language must be one of {sorted(WORD_SEPS)}, got {language!r}"
        )
    return language


def _static_matrix(
    embeddings: corpus_mod.StaticEmbeddings, vocab: corpus_mod.Vocabulary, d_static: int
) -> np.ndarray:
    if embeddings.dim != d_static:
        raise ConfigError(
            f"static embeddings have dim {embeddings.dim}, config says {d_static}"
        )
    matrix = np.zeros((vocab.n_tokens, d_static))
    for token, tid in vocab.token_to_id.items():
        if token in embeddings:
            matrix[tid] = embeddings.lookup(token)
    return matrix


def _needs_ctx(config: dict[str, str]) -> bool:
    return (
        config.get("use_ctx", "false") in ("true", "True")
        or config.get("encoder_mode") == ENCODER_CHUNKED
    )


def _load_features(
    run: dict[str, str], corpus: Corpus, tag_key: str, ctx_key: str, use_tag: bool, need_ctx: bool
) -> tuple[list[list[str]] | None, list[np.ndarray] | None]:
    tags = None
    if use_tag:
        tags = corpus_mod.load_bies_file(config_mod.require(run, tag_key), corpus)
    ctx = None
    if need_ctx:
        ctx = corpus_mod.load_contextual_file(config_mod.require(run, ctx_key), corpus)
    return tags, ctx


def cmd_train(config_path: str) -> None:
    run = config_mod.load_config(config_path)
    system = config_mod.require(run, "system")
    if system not in (ckpt_mod.SYSTEM_SPANSEG, ckpt_mod.SYSTEM_CRF):
        raise ConfigError(
            f"system must be {ckpt_mod.SYSTEM_SPANSEG} or {ckpt_mod.SYSTEM_CRF} "
            f"for training, got {system!r}"
        )
    language = _check_language(run.get("language", VIETNAMESE))
    checkpoint_path = config_mod.require(run, "checkpoint")
    train_corpus = corpus_mod.load_corpus(config_mod.require(run, "train"), language)
    dev_corpus = corpus_mod.load_corpus(config_mod.require(run, "dev"), language)
    if not train_corpus.sentences:
        raise ConfigError("training corpus is empty")
    if not dev_corpus.sentences:
        raise ConfigError("dev corpus is empty")

    overrides: dict[str, str] = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        overrides["seed"] = env_seed
    use_tag = run.get("use_tag", "false") in ("true", "True")
    need_ctx = _needs_ctx(run)
    train_tags, train_ctx = _load_features(
        run, train_corpus, "tag_file", "ctx_file", use_tag, need_ctx
    )
    dev_tags, dev_ctx = _load_features(
        run, dev_corpus, "dev_tag_file", "dev_ctx_file", use_tag, need_ctx
    )
    if need_ctx and "d_ctx" not in run:
        overrides["d_ctx"] = str(train_ctx[0].shape[1])
    config = config_mod.model_config(run, overrides)

    vocab = corpus_mod.build_vocab(train_corpus)
    static_matrix = None
    if "static_emb" in run:
        embeddings = corpus_mod.load_static_embeddings(run["static_emb"])
        static_matrix = _static_matrix(embeddings, vocab, config.d_static)

    cls = SpanSegModel if system == ckpt_mod.SYSTEM_SPANSEG else CrfModel
    model = cls(config, vocab, static_matrix=static_matrix)
    train_examples = training_mod.examples_from_corpus(train_corpus, train_tags, train_ctx)
    dev_examples = training_mod.examples_from_corpus(dev_corpus, dev_tags, dev_ctx)

    result = training_mod.train_model(model, train_examples, dev_examples, config)

    ckpt_mod.save_model(checkpoint_path, system, language, model)
    log_path = run.get("log", checkpoint_path + ".log")
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(result.log_lines) + "\n")
    report_mod.training_curves(result.curve, checkpoint_path + ".curves.png")
    print(
        f"trained {system}: best epoch {result.best_epoch}, "
        f"dev F {result.best_f:.2f}; checkpoint {checkpoint_path}",
        file=sys.stderr,
    )


def _input_tokens(line: str, language: str, lineno: int) -> list[str]:
    if language == VIETNAMESE:
        tokens = line.split()
    else:
        stripped = line.strip()
        if any(ch.isspace() for ch in stripped):
            raise FormatError(
                f"line {lineno}: unsegmented {CHINESE} input must not contain spaces"
            )
        tokens = list(stripped)
    if not tokens:
        raise FormatError(f"line {lineno}: empty sentence")
    return tokens


def _oracle_segment(run: dict[str, str], language: str, lines: list[str]) -> list[list[str]]:
    """Decode with the gold-indicator scorer: probability 0.99 on every
    gold span, 0.01 elsewhere, no width cap."""
    gold_corpus = corpus_mod.load_corpus(config_mod.require(run, "oracle_gold"), language)
    if len(gold_corpus.sentences) != len(lines):
        raise FormatError(
            f"oracle corpus has {len(gold_corpus.sentences)} sentences, "
            f"input has {len(lines)}"
        )
    sep = WORD_SEPS[language]
    out = []
    for i, line in enumerate(lines):
        tokens = _input_tokens(line, language, i + 1)
        gold = gold_corpus.sentences[i]
        if tokens != gold.tokens:
            raise FormatError(
                f"line {i + 1}: input tokens do not match the oracle sentence"
            )
        n = len(tokens)
        gold_set = set(gold.gold_spans)
        scores = {
            span: (ORACLE_HIGH if span in gold_set else ORACLE_LOW)
            for span in enumerate_spans(n, n)
        }
        table = ScoreTable(n, scores, n)
        scored = decoder_mod.predict_spans(table, 0.5)
        spans = decoder_mod.span_post_processing(scored, table.single_score, n)
        out.append(spans_to_words(spans, tokens, sep))
    return out


def cmd_segment(config_path: str, input_path: str, output_path: str) -> None:
    run = config_mod.load_config(config_path)
    with open(input_path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    if run.get("system") == "oracle":
        language = _check_language(run.get("language", VIETNAMESE))
        segmented = _oracle_segment(run, language, lines)
    else:
        model, _, language = ckpt_mod.load_model(config_mod.require(run, "checkpoint"))
        if "language" in run:
            language = _check_language(run["language"])
        sep = WORD_SEPS[language]
        use_tag = model.config.use_tag
        need_ctx = model.config.use_ctx or model.config.encoder_mode == ENCODER_CHUNKED
        token_lists = [
            _input_tokens(line, language, i + 1) for i, line in enumerate(lines)
        ]
        # Feature loaders validate against a corpus; align them with a
        # singleton-span stand-in built from the input tokens.
        stand_in = Corpus(
            [
                SegmentedSentence(tokens, words_to_spans([1] * len(tokens)))
                for tokens in token_lists
            ],
            language,
        ) if token_lists else Corpus([], language)
        tags, ctx = _load_features(run, stand_in, "tag_file", "ctx_file", use_tag, need_ctx)
        segmented = []
        for i, tokens in enumerate(token_lists):
            feats = SentenceFeatures(
                tags=tags[i] if tags is not None else None,
                ctx=ctx[i] if ctx is not None else None,
            )
            spans = model.predict(tokens, feats)
            segmented.append(spans_to_words(spans, tokens, sep))

    with open(output_path, "w", encoding="utf-8") as fh:
        for words in segmented:
            fh.write(" ".join(words) + "\n")


def _corpus_spans(corpus: Corpus) -> list[list[tuple[int, int]]]:
    return [s.gold_spans for s in corpus.sentences]


def cmd_eval(
    gold_path: str,
    pred_path: str,
    train_path: str | None,
    language: str,
    report_dir: str | None,
) -> None:
    language = _check_language(language)
    gold = corpus_mod.load_corpus(gold_path, language)
    pred = corpus_mod.load_corpus(pred_path, language)
    train_word_set = None
    gold_words = None
    if train_path is not None:
        train_corpus = corpus_mod.load_corpus(train_path, language)
        train_word_set = corpus_mod.build_vocab(train_corpus).word_set
        sep = WORD_SEPS[language]
        gold_words = [
            spans_to_words(s.gold_spans, s.tokens, sep) for s in gold.sentences
        ]
    result = evaluate(_corpus_spans(gold), _corpus_spans(pred), gold_words, train_word_set)
    show_oov = train_path is not None
    sys.stdout.write(report_mod.eval_text(result, show_oov))
    if report_dir is not None:
        report_mod.write_report_dir(
            report_dir,
            report_mod.eval_text(result, show_oov),
            report_mod.eval_tsv(result, show_oov),
            lambda png: report_mod.eval_figure(result, png),
        )


def _corpus_bies(corpus: Corpus) -> list[list[str]]:
    return [
        [t.value for t in spans_to_bies(s.gold_spans)] for s in corpus.sentences
    ]


def cmd_analyze(
    gold_path: str, a_path: str, b_path: str, language: str, report_dir: str | None
) -> None:
    language = _check_language(language)
    gold = corpus_mod.load_corpus(gold_path, language)
    pred_a = corpus_mod.load_corpus(a_path, language)
    pred_b = corpus_mod.load_corpus(b_path, language)
    for name, pred in (("first", pred_a), ("second", pred_b)):
        if len(pred.sentences) != len(gold.sentences):
            raise FormatError(
                f"{name} prediction has {len(pred.sentences)} sentences, "
                f"gold has {len(gold.sentences)}"
            )
    report = ambiguity_stats(_corpus_bies(gold), _corpus_bies(pred_a), _corpus_bies(pred_b))
    sys.stdout.write(report_mod.ambiguity_text(report))
    if report_dir is not None:
        report_mod.write_report_dir(
            report_dir,
            report_mod.ambiguity_text(report),
            report_mod.ambiguity_tsv(report),
            lambda png: report_mod.ambiguity_figure(report, png),
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spanseg", description="Word segmentation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model from a config file")
    p_train.add_argument("config")

    p_seg = sub.add_parser("segment", help="segment a file of raw sentences")
    p_seg.add_argument("config")
    p_seg.add_argument("input")
    p_seg.add_argument("output")

    p_eval = sub.add_parser("eval", help="score a segmented file against gold")
    p_eval.add_argument("gold")
    p_eval.add_argument("pred")
    p_eval.add_argument("train", nargs="?", default=None)
    p_eval.add_argument("--lang", default=VIETNAMESE, choices=sorted(WORD_SEPS))
    p_eval.add_argument("--report", default=None, metavar="DIR")

    p_an = sub.add_parser(
        "analyze", help="three-token ambiguity table for two systems"
    )
    p_an.add_argument("gold")
    p_an.add_argument("a")
    p_an.add_argument("b")
    p_an.add_argument("--lang", default=VIETNAMESE, choices=sorted(WORD_SEPS))
    p_an.add_argument("--report", default=None, metavar="DIR")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cmd_train(args.config)
        elif args.command == "segment":
            cmd_segment(args.config, args.input, args.output)
        elif args.command == "eval":
            cmd_eval(args.gold, args.pred, args.train, args.lang, args.report)
        else:
            cmd_analyze(args.gold, args.a, args.b, args.lang, args.report)
    except (ConfigError, FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
