"""The span scorer: input composition, fencepost encoding, boundary MLPs,
biaffine span scores, and the binary cross-entropy objective.

Geometry, fixed throughout the package: a sentence of n tokens is encoded
with sentinel rows, giving forward states f_0..f_n and backward states
b_1..b_{n+1}. Fencepost j carries v_j = f_j concat b_{j+1}. Token i
(1-based) has left boundary representation MLP_left(v_{i-1}) and right
boundary representation MLP_right(v_i); the pre-MLP vector is shared
between the right boundary of token i and the left boundary of token i+1.
A span (l, r) is scored from the left boundary of token l+1 and the right
boundary of token r, i.e. from v_l and v_r.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
import math

import numpy as np

from . import autodiff as ad
from . import corpus as corpus_mod
from . import decoder as decoder_mod
from .autodiff import Parameter, Tensor
from .errors import ConfigError, FormatError
from .layers import BiLstm, CharBiLstm, EmbeddingTable, Mlp, Rng, xavier_uniform
from .spans import BIES_TAGS, Span, enumerate_spans

# sigmoid saturates to exactly 1.0 in 64-bit floats near logit 37; scores
# are clipped to keep the strictly-(0,1) contract.
SCORE_FLOOR = 1e-12

ENCODER_BILSTM = "bilstm"
ENCODER_CHUNKED = "chunked_ctx"


@dataclass
class SpanSegConfig:
    """Hyperparameters shared by the span scorer and the CRF baseline."""

    d_static: int = 100
    d_dynamic: int = 100
    d_char: int = 100
    d_char_emb: int = 50
    d_tag: int = 100
    d_ctx_proj: int = 100
    d_ctx: int = 0
    layers: int = 3
    hidden: int = 400
    mlp_dim: int = 500
    dropout: float = 0.33
    max_width: int = 7
    threshold: float = 0.5
    use_tag: bool = False
    use_ctx: bool = False
    encoder_mode: str = ENCODER_BILSTM
    lr: float = 1e-3
    weight_decay: float = 0.01
    max_epochs: int = 100
    patience: int = 20
    batch_token_budget: int = 5000
    seed: int = 12345

    def validate(self) -> None:
        positive = [
            "d_static", "d_dynamic", "d_char", "d_char_emb", "d_tag", "d_ctx_proj",
            "layers", "hidden", "mlp_dim", "max_width", "lr", "max_epochs",
            "patience", "batch_token_budget",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.d_static != self.d_dynamic:
            raise ConfigError(
                f"static and dynamic embeddings are summed and must share a "
                f"dimension: {self.d_static} vs {self.d_dynamic}"
            )
        if self.d_char % 2 != 0:
            raise ConfigError(f"d_char must be even (two directions), got {self.d_char}")
        if self.encoder_mode not in (ENCODER_BILSTM, ENCODER_CHUNKED):
            raise ConfigError(f"unknown encoder_mode {self.encoder_mode!r}")
        if self.encoder_mode == ENCODER_CHUNKED:
            if self.d_ctx <= 0:
                raise ConfigError("encoder_mode=chunked_ctx needs d_ctx > 0")
            if self.d_ctx % 2 != 0:
                raise ConfigError(f"chunked contextual dim must be even, got {self.d_ctx}")
        if self.use_ctx and self.encoder_mode == ENCODER_BILSTM and self.d_ctx <= 0:
            raise ConfigError("use_ctx needs d_ctx > 0 (dimension of the ingested vectors)")
        if self.weight_decay < 0.0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")

    def to_dict(self) -> dict[str, str]:
        return {f.name: str(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, raw: dict[str, str]) -> "SpanSegConfig":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"unknown model config key {key!r}")
            kwargs[key] = _parse_field(key, value)
        config = cls(**kwargs)
        config.validate()
        return config


def _parse_field(key: str, value: str):
    bool_keys = {"use_tag", "use_ctx"}
    float_keys = {"dropout", "threshold", "lr", "weight_decay"}
    str_keys = {"encoder_mode"}
    if key in bool_keys:
        if value not in ("true", "false", "True", "False"):
            raise ConfigError(f"{key} must be true or false, got {value!r}")
        return value in ("true", "True")
    if key in float_keys:
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {value!r}")
    if key in str_keys:
        return value
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}")


@dataclass
class SentenceFeatures:
    """Optional per-sentence feature inputs, aligned with the tokens."""

    tags: list[str] | None = None
    ctx: np.ndarray | None = None


EMPTY_FEATURES = SentenceFeatures()


class ScoreTable:
    """Probabilities for every enumerable span of one sentence.

    Keys are exactly enumerate_spans(n, max_width); values are clipped
    into [SCORE_FLOOR, 1 - SCORE_FLOOR] so every score is strictly
    between 0 and 1.
    """

    def __init__(self, n: int, scores: dict[Span, float], max_width: int):
        expected = enumerate_spans(n, max_width)
        if set(scores) != set(expected):
            raise ValueError(
                f"score table keys do not match the enumerable spans of n={n}, "
                f"max_width={max_width}"
            )
        self.n = n
        self.max_width = max_width
        self.scores = {
            span: min(max(score, SCORE_FLOOR), 1.0 - SCORE_FLOOR)
            for span, score in scores.items()
        }

    def score(self, l: int, r: int) -> float:
        return self.scores[(l, r)]

    def single_score(self, i: int) -> float:
        return self.scores[(i, i + 1)]

    def items_sorted(self) -> list[tuple[Span, float]]:
        return sorted(self.scores.items())


class InputEncoder:
    """Everything below the boundary MLPs: token embeddings, the character
    BiLSTM, optional tag and contextual features, and the sentence encoder
    (a stacked BiLSTM, or chunked ingested vectors)."""

    def __init__(
        self,
        config: SpanSegConfig,
        vocab: corpus_mod.Vocabulary,
        static_matrix: np.ndarray | None,
        rng: Rng,
    ):
        config.validate()
        self.config = config
        self.vocab = vocab
        self._params: list[Parameter] = []

        if config.encoder_mode == ENCODER_CHUNKED:
            self.static_matrix = np.zeros((len(vocab.token_to_id), config.d_static))
            return

        n_tokens = len(vocab.token_to_id)
        if static_matrix is None:
            static_matrix = np.zeros((n_tokens, config.d_static))
        if static_matrix.shape != (n_tokens, config.d_static):
            raise ConfigError(
                f"static matrix shape {static_matrix.shape} does not match "
                f"vocabulary size {n_tokens} and d_static {config.d_static}"
            )
        if not np.isfinite(static_matrix).all():
            raise ConfigError("static matrix holds non-finite values")
        self.static_matrix = static_matrix.astype(np.float64)

        self.dynamic = EmbeddingTable(rng, "encoder.dynamic", n_tokens, config.d_dynamic)
        self.char_table = EmbeddingTable(
            rng, "encoder.chars", len(vocab.char_to_id), config.d_char_emb
        )
        self.char_lstm = CharBiLstm(rng, "encoder.charlstm", config.d_char_emb, config.d_char)
        self._params += self.dynamic.parameters()
        self._params += self.char_table.parameters()
        self._params += self.char_lstm.parameters()

        width = config.d_dynamic + config.d_char
        self.tag_table = None
        if config.use_tag:
            self.tag_table = EmbeddingTable(rng, "encoder.tags", len(BIES_TAGS), config.d_tag)
            self._params += self.tag_table.parameters()
            width += config.d_tag
        self.ctx_proj = None
        if config.use_ctx:
            self.ctx_proj = Parameter(
                xavier_uniform(rng, (config.d_ctx, config.d_ctx_proj)), "encoder.ctxproj"
            )
            self._params.append(self.ctx_proj)
            width += config.d_ctx_proj
        self.input_width = width

        self.bos = Parameter(rng.normal(0.01, (width,)), "encoder.bos", weight_decay_eligible=False)
        self.eos = Parameter(rng.normal(0.01, (width,)), "encoder.eos", weight_decay_eligible=False)
        self._params += [self.bos, self.eos]

        self.bilstm = BiLstm(
            rng, "encoder.bilstm", width, config.hidden, config.layers, config.dropout
        )
        self._params += self.bilstm.parameters()

    @property
    def fencepost_dim(self) -> int:
        if self.config.encoder_mode == ENCODER_CHUNKED:
            return self.config.d_ctx
        return 2 * self.config.hidden

    def parameters(self) -> list[Parameter]:
        return list(self._params)

    def _char_summary(self, token: str) -> Tensor:
        ids = [self.vocab.char_id(ch) for ch in token]
        vecs = self.char_table.rows(ids)
        per_char = [ad.reshape(ad.narrow(vecs, i, 1), (self.config.d_char_emb,)) for i in range(len(ids))]
        return self.char_lstm.summary(per_char)

    def embed_tokens(self, tokens: list[str], feats: SentenceFeatures) -> list[Tensor]:
        config = self.config
        if config.use_tag and feats.tags is None:
            raise FormatError("use_tag is set but the sentence has no boundary tags")
        if config.use_tag and len(feats.tags) != len(tokens):
            raise FormatError(
                f"boundary tags cover {len(feats.tags)} tokens, sentence has {len(tokens)}"
            )
        ctx_rows = None
        if config.use_ctx:
            if feats.ctx is None:
                raise FormatError("use_ctx is set but the sentence has no contextual vectors")
            ctx_rows = corpus_mod.token_rows(feats.ctx, len(tokens))
            if ctx_rows.shape[1] != config.d_ctx:
                raise FormatError(
                    f"contextual vectors have dim {ctx_rows.shape[1]}, config says {config.d_ctx}"
                )
        out = []
        for i, token in enumerate(tokens):
            tid = self.vocab.token_id(token)
            dyn = ad.reshape(self.dynamic.rows([tid]), (config.d_dynamic,))
            summed = ad.add(dyn, ad.constant(self.static_matrix[tid]))
            parts = [summed, self._char_summary(token)]
            if config.use_tag:
                tag = feats.tags[i]
                if tag not in BIES_TAGS:
                    raise FormatError(f"unknown boundary tag {tag!r}")
                parts.append(
                    ad.reshape(self.tag_table.rows([BIES_TAGS.index(tag)]), (config.d_tag,))
                )
            if config.use_ctx:
                parts.append(ad.matmul(ad.constant(ctx_rows[i]), self.ctx_proj))
            out.append(ad.concat(parts))
        return out

    def fencepost_vectors(
        self, tokens: list[str], feats: SentenceFeatures, train: bool = False, rng: Rng | None = None
    ) -> list[Tensor]:
        """v_0..v_n for a sentence of n tokens."""
        if not tokens:
            raise ValueError("cannot encode an empty sentence")
        if self.config.encoder_mode == ENCODER_CHUNKED:
            return self._chunked_fenceposts(tokens, feats)
        rows = [self.bos] + self.embed_tokens(tokens, feats) + [self.eos]
        if train and self.config.dropout > 0.0:
            if rng is None:
                raise ValueError("training-mode encoder needs a dropout rng")
            mask = rng.dropout_mask(self.config.dropout, (len(rows), self.input_width))
            rows = [ad.mul(row, ad.constant(mask[p])) for p, row in enumerate(rows)]
        fstates, bstates = self.bilstm.forward(rows, train=train, rng=rng)
        n = len(tokens)
        return [ad.concat([fstates[j], bstates[j + 1]]) for j in range(n + 1)]

    def _chunked_fenceposts(self, tokens: list[str], feats: SentenceFeatures) -> list[Tensor]:
        if feats.ctx is None:
            raise FormatError("chunked encoder needs contextual vectors for every sentence")
        rows = corpus_mod.sentinel_rows(feats.ctx, len(tokens))
        d = rows.shape[1]
        if d != self.config.d_ctx:
            raise FormatError(
                f"contextual vectors have dim {d}, config says {self.config.d_ctx}"
            )
        half = d // 2
        n = len(tokens)
        # Row p splits into f_p (first half) and b_p (second half); the
        # fencepost pairing is the same as the BiLSTM path.
        out = []
        for j in range(n + 1):
            f = rows[j, :half]
            b = rows[j + 1, half:]
            out.append(ad.constant(np.concatenate([f, b])))
        return out


class SpanSegModel:
    """Boundary MLPs and the biaffine scorer on top of an InputEncoder."""

    # The mean runs over the spans actually enumerated (width-capped),
    # not over all n(n+1)/2 candidates; the training log records this.
    loss_description = (
        "mean binary cross-entropy over enumerated spans (width-capped); "
        "normalizer = count of enumerated spans"
    )

    def __init__(
        self,
        config: SpanSegConfig,
        vocab: corpus_mod.Vocabulary,
        static_matrix: np.ndarray | None = None,
        rng: Rng | None = None,
    ):
        config.validate()
        if rng is None:
            rng = Rng(config.seed, "init")
        self.config = config
        self.vocab = vocab
        self.encoder = InputEncoder(config, vocab, static_matrix, rng)
        d = self.encoder.fencepost_dim
        self.mlp_left = Mlp(rng, "scorer.left", d, config.mlp_dim, config.dropout)
        self.mlp_right = Mlp(rng, "scorer.right", d, config.mlp_dim, config.dropout)
        self.biaffine = Parameter(
            xavier_uniform(rng, (config.mlp_dim + 1, config.mlp_dim)), "scorer.biaffine"
        )

    def parameters(self) -> list[Parameter]:
        return (
            self.encoder.parameters()
            + self.mlp_left.parameters()
            + self.mlp_right.parameters()
            + [self.biaffine]
        )

    def boundary_reps(
        self, fenceposts: list[Tensor], train: bool = False, rng: Rng | None = None
    ) -> tuple[Tensor, Tensor]:
        """Left reps for tokens 1..n (rows 0..n-1) and right reps for
        tokens 1..n (rows 0..n-1), as two n-row matrices."""
        n = len(fenceposts) - 1
        v = ad.stack(fenceposts)
        left = self.mlp_left(ad.narrow(v, 0, n), train=train, rng=rng)
        right = self.mlp_right(ad.narrow(v, 1, n), train=train, rng=rng)
        return left, right

    def span_logits(self, left: Tensor, right: Tensor) -> Tensor:
        """Matrix S with S[l, r-1] = biaffine logit of span (l, r)."""
        n = left.shape[0]
        augmented = ad.concat([left, ad.constant(np.ones((n, 1)))], axis=1)
        return ad.matmul(ad.matmul(augmented, self.biaffine), ad.transpose(right))

    def _forward_logits(
        self, tokens: list[str], feats: SentenceFeatures, train: bool, rng: Rng | None
    ) -> tuple[Tensor, list[Span]]:
        fenceposts = self.encoder.fencepost_vectors(tokens, feats, train=train, rng=rng)
        left, right = self.boundary_reps(fenceposts, train=train, rng=rng)
        logits = self.span_logits(left, right)
        spans = enumerate_spans(len(tokens), self.config.max_width)
        ls = [l for l, _ in spans]
        rs = [r - 1 for _, r in spans]
        return ad.take_pairs(logits, ls, rs), spans

    def score_all(self, tokens: list[str], feats: SentenceFeatures = EMPTY_FEATURES) -> ScoreTable:
        logit_vec, spans = self._forward_logits(tokens, feats, train=False, rng=None)
        probs = ad.sigmoid_values(logit_vec.data)
        return ScoreTable(
            len(tokens), dict(zip(spans, probs.tolist())), self.config.max_width
        )

    def loss(
        self,
        sentence: corpus_mod.SegmentedSentence,
        feats: SentenceFeatures,
        rng: Rng | None = None,
        train: bool = True,
    ) -> tuple[Tensor, int]:
        """Mean binary cross-entropy over the enumerated spans, computed
        from logits in log-space. Gold spans wider than max_width cannot
        be positives; they are dropped and counted."""
        logit_vec, spans = self._forward_logits(sentence.tokens, feats, train=train, rng=rng)
        gold = set(sentence.gold_spans)
        labels = np.array([1.0 if span in gold else 0.0 for span in spans])
        dropped = sum(1 for (l, r) in gold if r - l > self.config.max_width)
        count = len(spans)
        # -[y log p + (1-y) log(1-p)] with p = sigmoid(x) is softplus(x) - y*x
        total = ad.sub(
            ad.tsum(ad.softplus(logit_vec)),
            ad.tsum(ad.mul(logit_vec, ad.constant(labels))),
        )
        return ad.scale(total, 1.0 / count), dropped

    def predict(
        self, tokens: list[str], feats: SentenceFeatures = EMPTY_FEATURES
    ) -> list[Span]:
        table = self.score_all(tokens, feats)
        scored = decoder_mod.predict_spans(table, self.config.threshold)
        return decoder_mod.span_post_processing(scored, table.single_score, len(tokens))
