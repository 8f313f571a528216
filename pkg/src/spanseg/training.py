"""The training loop shared by the span scorer and the CRF baseline.

Determinism contract: all randomness comes from the config seed through
three named streams (parameter init, epoch shuffles, dropout masks).
Dropout masks are drawn sentence-major in batch order; within a sentence
the model draws them input-first, then per encoder layer, then at the
projection heads. Two runs with the same seed and data produce identical
epoch logs.

Each epoch shuffles the sentences, packs them greedily into batches of
at most batch_token_budget tokens (a sentence is never split; one longer
than the budget forms its own batch), takes one optimizer step per batch
on the mean per-sentence loss, then scores the dev corpus with the real
decoder. Early stopping keeps the parameters of the best dev-F epoch and
stops once patience epochs pass without strict improvement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .corpus import Corpus, SegmentedSentence
from .evaluate import prf
from .layers import Rng
from .model import SentenceFeatures, SpanSegConfig
from .optim import AdamW


@dataclass
class Example:
    sentence: SegmentedSentence
    feats: SentenceFeatures = field(default_factory=SentenceFeatures)


@dataclass
class TrainResult:
    log_lines: list[str]
    curve: list[tuple[int, float, float]]
    best_epoch: int
    best_f: float
    dropped_wide_spans: int


def pack_batches(order: np.ndarray, lengths: list[int], budget: int) -> list[list[int]]:
    """Greedy pass over `order`: flush when the next sentence would push
    the batch past the token budget."""
    if budget < 1:
        raise ValueError(f"token budget must be >= 1, got {budget}")
    batches: list[list[int]] = []
    current: list[int] = []
    used = 0
    for idx in order:
        idx = int(idx)
        n = lengths[idx]
        if current and used + n > budget:
            batches.append(current)
            current = []
            used = 0
        current.append(idx)
        used += n
    if current:
        batches.append(current)
    return batches


def dev_f_score(model, examples: list[Example]) -> float:
    gold = [ex.sentence.gold_spans for ex in examples]
    pred = [model.predict(ex.sentence.tokens, ex.feats) for ex in examples]
    return prf(gold, pred).f1


def train_model(
    model,
    train_examples: list[Example],
    dev_examples: list[Example],
    config: SpanSegConfig,
) -> TrainResult:
    """Fit `model` in place and leave it holding the best-dev parameters."""
    if not train_examples:
        raise ValueError("training corpus is empty")
    if not dev_examples:
        raise ValueError("development corpus is empty")

    params = model.parameters()
    optimizer = AdamW(params, lr=config.lr, weight_decay=config.weight_decay)
    data_rng = Rng(config.seed, "data")
    dropout_rng = Rng(config.seed, "dropout")
    lengths = [len(ex.sentence) for ex in train_examples]

    log_lines: list[str] = []
    curve: list[tuple[int, float, float]] = []
    description = getattr(model, "loss_description", None)
    if description:
        log_lines.append(f"# loss: {description}")
    best_f = -1.0
    best_epoch = 0
    best_values: list[np.ndarray] | None = None
    dropped_total = 0

    for epoch in range(1, config.max_epochs + 1):
        order = data_rng.permutation(len(train_examples))
        batches = pack_batches(order, lengths, config.batch_token_budget)
        losses: list[float] = []
        for batch in batches:
            scale = 1.0 / len(batch)
            for idx in batch:
                ex = train_examples[idx]
                loss, dropped = model.loss(ex.sentence, ex.feats, rng=dropout_rng, train=True)
                if epoch == 1:
                    dropped_total += dropped
                losses.append(loss.item())
                ad.backward(ad.scale(loss, scale))
            optimizer.step()
        mean_loss = float(np.mean(losses))
        dev_f = dev_f_score(model, dev_examples)
        log_lines.append(f"epoch {epoch} loss {mean_loss:.6f} dev_f {dev_f:.2f}")
        curve.append((epoch, mean_loss, dev_f))
        if dev_f > best_f:
            best_f = dev_f
            best_epoch = epoch
            best_values = [p.data.copy() for p in params]
        if epoch - best_epoch >= config.patience:
            break

    for p, values in zip(params, best_values):
        p.data = values
    if dropped_total:
        log_lines.append(
            f"# dropped {dropped_total} gold spans wider than {config.max_width}"
        )
    return TrainResult(log_lines, curve, best_epoch, best_f, dropped_total)


def examples_from_corpus(
    corpus: Corpus,
    tags: list[list[str]] | None = None,
    ctx: list[np.ndarray] | None = None,
) -> list[Example]:
    """Zip a corpus with its optional per-sentence feature inputs."""
    examples = []
    for i, sentence in enumerate(corpus.sentences):
        feats = SentenceFeatures(
            tags=tags[i] if tags is not None else None,
            ctx=ctx[i] if ctx is not None else None,
        )
        examples.append(Example(sentence, feats))
    return examples
