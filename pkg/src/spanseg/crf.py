"""Linear-chain CRF over boundary tags, sharing the span model's encoder.

Token i is represented by the fencepost pair f_i concat b_{i+1}; a linear
map turns that into four tag scores. Transitions cover the four real tags
plus virtual start/stop vectors. The partition function runs as a
log-sum-exp recursion on the autodiff tape; Viterbi runs in plain numpy
with ties broken toward the smallest tag index.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from . import corpus as corpus_mod
from .autodiff import Parameter, Tensor
from .errors import FormatError
from .layers import Linear, Rng
from .model import EMPTY_FEATURES, InputEncoder, SentenceFeatures, SpanSegConfig
from .spans import BIES_TAGS, Span, bies_to_spans, spans_to_bies

N_TAGS = len(BIES_TAGS)


def _tag_row(emissions: Tensor, t: int) -> Tensor:
    return ad.reshape(ad.narrow(emissions, t, 1), (N_TAGS,))


def crf_forward_logZ(emissions: Tensor, trans: Tensor, start: Tensor, stop: Tensor) -> Tensor:
    """Log partition over all tag sequences for an (n, 4) emission matrix."""
    n = emissions.shape[0]
    if n < 1:
        raise ValueError("partition function needs at least one position")
    alpha = ad.add(_tag_row(emissions, 0), start)
    for t in range(1, n):
        # paths[p, c] = alpha[p] + trans[p, c]
        paths = ad.add(ad.reshape(alpha, (N_TAGS, 1)), trans)
        alpha = ad.add(ad.logsumexp(paths, axis=0), _tag_row(emissions, t))
    return ad.logsumexp(ad.add(alpha, stop))


def crf_gold_score(
    emissions: Tensor, trans: Tensor, start: Tensor, stop: Tensor, tags: list[int]
) -> Tensor:
    n = emissions.shape[0]
    if len(tags) != n:
        raise ValueError(f"gold path has {len(tags)} tags for {n} positions")
    if any(not 0 <= t < N_TAGS for t in tags):
        raise ValueError(f"tag ids must be in [0, {N_TAGS}): {tags}")
    total = ad.tsum(ad.take_pairs(emissions, list(range(n)), tags))
    total = ad.add(total, ad.reshape(ad.narrow(start, tags[0], 1), ()))
    total = ad.add(total, ad.reshape(ad.narrow(stop, tags[-1], 1), ()))
    if n > 1:
        total = ad.add(total, ad.tsum(ad.take_pairs(trans, tags[:-1], tags[1:])))
    return total


def crf_nll(
    emissions: Tensor, trans: Tensor, start: Tensor, stop: Tensor, tags: list[int]
) -> Tensor:
    """logZ minus the gold path score; nonnegative up to rounding."""
    logz = crf_forward_logZ(emissions, trans, start, stop)
    return ad.sub(logz, crf_gold_score(emissions, trans, start, stop, tags))


def viterbi_decode(
    emissions: np.ndarray, trans: np.ndarray, start: np.ndarray, stop: np.ndarray
) -> list[int]:
    """Highest-scoring tag sequence; argmax ties take the smallest index."""
    n = emissions.shape[0]
    if n < 1:
        raise ValueError("cannot decode an empty sequence")
    delta = start + emissions[0]
    back: list[np.ndarray] = []
    for t in range(1, n):
        paths = delta[:, None] + trans
        best_prev = np.argmax(paths, axis=0)
        back.append(best_prev)
        delta = paths[best_prev, np.arange(N_TAGS)] + emissions[t]
    final = delta + stop
    tag = int(np.argmax(final))
    path = [tag]
    for best_prev in reversed(back):
        tag = int(best_prev[tag])
        path.append(tag)
    return path[::-1]


class CrfModel:
    """Encoder plus emission projection plus transition scores."""

    loss_description = "negative log-likelihood of the gold boundary tag sequence"

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
        self.emit = Linear(rng, "crf.emit", self.encoder.fencepost_dim, N_TAGS)
        # Transition scores act as additive biases between tags, so they
        # start at zero and take no weight decay.
        self.trans = Parameter(np.zeros((N_TAGS, N_TAGS)), "crf.trans", weight_decay_eligible=False)
        self.start = Parameter(np.zeros(N_TAGS), "crf.start", weight_decay_eligible=False)
        self.stop = Parameter(np.zeros(N_TAGS), "crf.stop", weight_decay_eligible=False)

    def parameters(self) -> list[Parameter]:
        return (
            self.encoder.parameters()
            + self.emit.parameters()
            + [self.trans, self.start, self.stop]
        )

    def emissions(
        self, tokens: list[str], feats: SentenceFeatures, train: bool = False, rng: Rng | None = None
    ) -> Tensor:
        fenceposts = self.encoder.fencepost_vectors(tokens, feats, train=train, rng=rng)
        n = len(tokens)
        v = ad.stack(fenceposts)
        token_reps = ad.narrow(v, 1, n)
        if train and self.config.dropout > 0.0:
            if rng is None:
                raise ValueError("training-mode emissions need a dropout rng")
            mask = rng.dropout_mask(self.config.dropout, token_reps.shape)
            token_reps = ad.mul(token_reps, ad.constant(mask))
        return self.emit(token_reps)

    def loss(
        self,
        sentence: corpus_mod.SegmentedSentence,
        feats: SentenceFeatures,
        rng: Rng | None = None,
        train: bool = True,
    ) -> tuple[Tensor, int]:
        tags = [BIES_TAGS.index(t) for t in spans_to_bies(sentence.gold_spans)]
        emissions = self.emissions(sentence.tokens, feats, train=train, rng=rng)
        return crf_nll(emissions, self.trans, self.start, self.stop, tags), 0

    def predict(
        self, tokens: list[str], feats: SentenceFeatures = EMPTY_FEATURES
    ) -> list[Span]:
        emissions = self.emissions(tokens, feats, train=False)
        tag_ids = viterbi_decode(
            emissions.data, self.trans.data, self.start.data, self.stop.data
        )
        return bies_to_spans([BIES_TAGS[t] for t in tag_ids])
