"""Word segmentation as span labeling, with a BiLSTM-CRF baseline.

The public surface:

* spans / corpus: span algebra, corpus and feature-file IO
* model / decoder: the biaffine span scorer and the greedy span repair
* crf: the linear-chain tagging baseline over the same encoder
* training / optim: the shared seeded training loop
* evaluate / report: word-level metrics, ambiguity analysis, figures
* checkpoint: manifest-plus-blob model serialization
* cli: the `spanseg` command
"""

from .corpus import (
    CHINESE,
    VIETNAMESE,
    Corpus,
    SegmentedSentence,
    Vocabulary,
    build_vocab,
    load_corpus,
    save_corpus,
)
from .crf import CrfModel, crf_forward_logZ, crf_nll, viterbi_decode
from .decoder import ScoredSpan, predict_spans, span_post_processing
from .errors import ConfigError, FormatError
from .evaluate import AmbiguityReport, EvalReport, ambiguity_stats, evaluate, prf
from .model import ScoreTable, SentenceFeatures, SpanSegConfig, SpanSegModel
from .spans import (
    BIES_TAGS,
    BiesTag,
    Span,
    bies_to_spans,
    enumerate_spans,
    is_partition,
    spans_to_bies,
    spans_to_words,
    words_to_spans,
)
from .training import Example, TrainResult, train_model

__version__ = "0.1.0"

__all__ = [
    "AmbiguityReport",
    "BIES_TAGS",
    "BiesTag",
    "CHINESE",
    "ConfigError",
    "Corpus",
    "CrfModel",
    "EvalReport",
    "Example",
    "FormatError",
    "ScoreTable",
    "ScoredSpan",
    "SegmentedSentence",
    "SentenceFeatures",
    "Span",
    "SpanSegConfig",
    "SpanSegModel",
    "TrainResult",
    "VIETNAMESE",
    "Vocabulary",
    "ambiguity_stats",
    "bies_to_spans",
    "build_vocab",
    "crf_forward_logZ",
    "crf_nll",
    "enumerate_spans",
    "evaluate",
    "is_partition",
    "load_corpus",
    "predict_spans",
    "prf",
    "save_corpus",
    "span_post_processing",
    "spans_to_bies",
    "spans_to_words",
    "train_model",
    "viterbi_decode",
    "words_to_spans",
]
