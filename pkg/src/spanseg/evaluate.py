"""Word-level scoring and the three-token ambiguity analysis.

A predicted word counts as correct when the same (l, r) span appears in
the gold segmentation of the same sentence. Precision, recall, and F are
reported as percentages. OOV recall looks only at gold words whose
surface string never occurred as a training word; when there are none it
is undefined rather than zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import FormatError
from .spans import BiesTag, Span, is_partition

# Tag triples that form the mirrored overlapping-ambiguity pair.
CASE_BES = ("B", "E", "S")
CASE_SBE = ("S", "B", "E")


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    matched: int
    n_gold: int
    n_pred: int
    oov_recall: float | None = None
    n_oov: int = 0

    def oov_display(self) -> str:
        if self.oov_recall is None:
            return "n/a"
        return f"{self.oov_recall:.2f}"


def _check_alignment(gold: list[list[Span]], pred: list[list[Span]]) -> None:
    if len(gold) != len(pred):
        raise FormatError(
            f"gold has {len(gold)} sentences, prediction has {len(pred)}"
        )
    for i, (g, p) in enumerate(zip(gold, pred)):
        n_g = g[-1][1] if g else 0
        n_p = p[-1][1] if p else 0
        if n_g != n_p:
            raise FormatError(
                f"sentence {i}: gold covers {n_g} tokens, prediction covers {n_p}"
            )
        if not is_partition(g, n_g) or not is_partition(p, n_p):
            raise FormatError(f"sentence {i}: segmentation is not a partition")


def prf(gold: list[list[Span]], pred: list[list[Span]]) -> EvalReport:
    """Corpus-level precision/recall/F over exact span matches."""
    _check_alignment(gold, pred)
    matched = 0
    n_gold = 0
    n_pred = 0
    for g, p in zip(gold, pred):
        gold_set = set(g)
        matched += sum(1 for span in p if span in gold_set)
        n_gold += len(g)
        n_pred += len(p)
    precision = 100.0 * matched / n_pred if n_pred else 0.0
    recall = 100.0 * matched / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return EvalReport(precision, recall, f1, matched, n_gold, n_pred)


def oov_recall(
    gold: list[list[Span]],
    pred: list[list[Span]],
    gold_words: list[list[str]],
    train_word_set: set[str],
) -> tuple[float | None, int]:
    """Recall over gold words absent from the training word set.

    gold_words[i][k] is the surface string of the k-th gold word of
    sentence i. Returns (rate, oov_count); rate is None when the corpus
    has no OOV words.
    """
    _check_alignment(gold, pred)
    total = 0
    recovered = 0
    for g, p, words in zip(gold, pred, gold_words):
        if len(words) != len(g):
            raise FormatError(
                f"{len(words)} word strings for {len(g)} gold spans"
            )
        pred_set = set(p)
        for span, word in zip(g, words):
            if word in train_word_set:
                continue
            total += 1
            if span in pred_set:
                recovered += 1
    if total == 0:
        return None, 0
    return 100.0 * recovered / total, total


def evaluate(
    gold: list[list[Span]],
    pred: list[list[Span]],
    gold_words: list[list[str]] | None = None,
    train_word_set: set[str] | None = None,
) -> EvalReport:
    report = prf(gold, pred)
    if train_word_set is not None:
        if gold_words is None:
            raise ValueError("OOV recall needs the gold word strings")
        rate, count = oov_recall(gold, pred, gold_words, train_word_set)
        report.oov_recall = rate
        report.n_oov = count
    return report


@dataclass
class CaseCounts:
    """Joint outcomes of two systems on one gold three-token pattern."""

    both_wrong: int = 0
    a_right_b_wrong: int = 0
    a_wrong_b_right: int = 0
    both_right: int = 0


@dataclass
class AmbiguityReport:
    cases: dict[str, CaseCounts] = field(
        default_factory=lambda: {"BES": CaseCounts(), "SBE": CaseCounts()}
    )

    def total(self, cell: str) -> int:
        return sum(getattr(c, cell) for c in self.cases.values())


def _window_outcome(gold_window: tuple, emitted: tuple) -> bool | None:
    """True = reproduced the gold pattern; False = emitted the mirror;
    None = anything else (the window does not count for this system)."""
    mirror = CASE_SBE if gold_window == CASE_BES else CASE_BES
    if emitted == gold_window:
        return True
    if emitted == mirror:
        return False
    return None


def ambiguity_stats(
    gold_tags: list[list[str]],
    tags_a: list[list[str]],
    tags_b: list[list[str]],
) -> AmbiguityReport:
    """Tabulate the two mirrored three-token patterns over all stride-one
    windows. A window enters the joint table only when the gold window is
    B E S or S B E and both systems emitted one of the two patterns
    there; other outputs leave the window uncounted."""
    if not (len(gold_tags) == len(tags_a) == len(tags_b)):
        raise FormatError(
            f"tag lists cover {len(gold_tags)}/{len(tags_a)}/{len(tags_b)} sentences"
        )
    report = AmbiguityReport()
    for i, (gold, a, b) in enumerate(zip(gold_tags, tags_a, tags_b)):
        if not (len(gold) == len(a) == len(b)):
            raise FormatError(
                f"sentence {i}: tag lengths {len(gold)}/{len(a)}/{len(b)} differ"
            )
        gold_vals = [str(BiesTag(t).value) for t in gold]
        a_vals = [str(BiesTag(t).value) for t in a]
        b_vals = [str(BiesTag(t).value) for t in b]
        for w in range(len(gold) - 2):
            gw = tuple(gold_vals[w : w + 3])
            if gw not in (CASE_BES, CASE_SBE):
                continue
            out_a = _window_outcome(gw, tuple(a_vals[w : w + 3]))
            out_b = _window_outcome(gw, tuple(b_vals[w : w + 3]))
            if out_a is None or out_b is None:
                continue
            counts = report.cases["BES" if gw == CASE_BES else "SBE"]
            if out_a and out_b:
                counts.both_right += 1
            elif out_a and not out_b:
                counts.a_right_b_wrong += 1
            elif not out_a and out_b:
                counts.a_wrong_b_right += 1
            else:
                counts.both_wrong += 1
    return report
