"""Greedy span decoding: threshold the score table, then repair overlaps
and missing boundaries so the result is always a partition.

The repair runs in two passes over a working list seeded with the
zero-length span (0, 0). Pass one walks the predicted spans in ascending
order, filling each gap before a span with a single gap span and
resolving an overlap with the top of the working list by keeping the
incumbent unless the newcomer scores strictly higher; a trailing gap to n
is filled the same way. Pass two walks the working list and splits any
remaining gap (a hole left behind by an eviction) at interior fenceposts
whose single-token score exceeds 0.5. Zero-length spans, including the
seed, are dropped from the returned list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .spans import Span, is_partition


@dataclass(frozen=True)
class ScoredSpan:
    span: Span
    score: float


def predict_spans(table, threshold: float) -> list[ScoredSpan]:
    """All table entries scoring strictly above the threshold, ascending
    by (l, r)."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    return [
        ScoredSpan(span, score)
        for span, score in table.items_sorted()
        if score > threshold
    ]


def span_post_processing(
    predicted: list[ScoredSpan], single_score: Callable[[int], float], n: int
) -> list[Span]:
    """Resolve overlaps and missing boundaries among the predicted spans.

    predicted must be sorted ascending by (l, r); single_score(i) is the
    score of the width-one span (i, i+1), consulted only when splitting a
    hole in pass two. The result partitions [0, n).
    """
    if n < 1:
        raise ValueError(f"sentence length must be >= 1, got {n}")
    spans = [s.span for s in predicted]
    if spans != sorted(spans):
        raise ValueError("predicted spans must be sorted ascending by (l, r)")
    score = {s.span: s.score for s in predicted}
    for l, r in spans:
        if not 0 <= l < r <= n:
            raise ValueError(f"span ({l}, {r}) is not a valid span within [0, {n}]")

    no_overlap: list[Span] = [(0, 0)]
    for y in spans:
        if no_overlap[-1][1] < y[0]:
            no_overlap.append((no_overlap[-1][1], y[0]))
        if no_overlap[-1][0] <= y[0] < no_overlap[-1][1]:
            if score[no_overlap[-1]] < score[y]:
                no_overlap.pop()
                no_overlap.append(y)
        else:
            no_overlap.append(y)
    if no_overlap[-1][1] < n:
        no_overlap.append((no_overlap[-1][1], n))

    result: list[Span] = []
    for i, y in enumerate(no_overlap):
        if 0 < i and no_overlap[i - 1][1] < y[0]:
            bounds = [no_overlap[i - 1][1]]
            for bound in range(no_overlap[i - 1][1], y[0]):
                if single_score(bound) > 0.5:
                    bounds.append(bound + 1)
            bounds.append(y[0])
            for j in range(len(bounds) - 1):
                result.append((bounds[j], bounds[j + 1]))
        result.append(y)

    result = [span for span in result if span[0] < span[1]]
    if not is_partition(result, n):
        raise RuntimeError(f"decoder produced a non-partition for n={n}: {result}")
    return result
