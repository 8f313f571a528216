"""Span algebra for word segmentation.

A sentence of n tokens has fenceposts 0..n (boundary positions between
tokens). A word made of tokens l+1..r (1-based token numbering) is the
half-open span (l, r). A segmentation is a list of spans that partitions
[0, n): sorted, contiguous, non-overlapping, starting at 0 and ending at n.

Everything here is pure and operates on plain tuples.
"""

from __future__ import annotations

from enum import Enum

Span = tuple[int, int]


class BiesTag(str, Enum):
    """Per-token word boundary tag: Begin, Inside, End, Singleton."""

    B = "B"
    I = "I"
    E = "E"
    S = "S"


BIES_TAGS = (BiesTag.B, BiesTag.I, BiesTag.E, BiesTag.S)


def words_to_spans(word_lengths: list[int]) -> list[Span]:
    """Turn a list of word lengths into the partition they induce.

    [2, 1, 2] -> [(0, 2), (2, 3), (3, 5)]
    """
    spans: list[Span] = []
    pos = 0
    for k, length in enumerate(word_lengths):
        if length < 1:
            raise ValueError(f"word {k} has non-positive length {length}")
        spans.append((pos, pos + length))
        pos += length
    return spans


def is_partition(spans: list[Span], n: int) -> bool:
    """True iff spans exactly tile [0, n) in ascending order."""
    if not spans:
        return n == 0
    if spans[0][0] != 0 or spans[-1][1] != n:
        return False
    prev_end = 0
    for l, r in spans:
        if l != prev_end or r <= l:
            return False
        prev_end = r
    return True


def spans_to_words(spans: list[Span], tokens: list[str], sep: str) -> list[str]:
    """Join each span's tokens into a word string.

    `sep` is '_' for the syllable-joined format and '' for the
    character-concatenated one.
    """
    if not is_partition(spans, len(tokens)):
        raise ValueError(f"spans {spans} do not partition [0, {len(tokens)})")
    return [sep.join(tokens[l:r]) for l, r in spans]


def spans_to_bies(spans: list[Span]) -> list[BiesTag]:
    """Tag every covered token: width-1 spans are S, wider ones B I* E."""
    if not spans or not is_partition(spans, spans[-1][1]):
        raise ValueError(f"spans {spans} are not a partition")
    tags: list[BiesTag] = []
    for l, r in spans:
        width = r - l
        if width == 1:
            tags.append(BiesTag.S)
        else:
            tags.append(BiesTag.B)
            tags.extend([BiesTag.I] * (width - 2))
            tags.append(BiesTag.E)
    return tags


def bies_to_spans(tags: list[BiesTag]) -> list[Span]:
    """Decode a BIES tag list into a partition, repairing ill-formed input.

    Repair rule, scanning left to right: B opens a word (closing any
    pending one at the previous fencepost), I continues a word or opens
    one when nothing is pending, E closes the pending word (or forms a
    singleton when nothing is pending), S emits a singleton (closing any
    pending word first). The end of the sentence closes a pending word.
    The result is always a partition of [0, len(tags)).
    """
    if not tags:
        raise ValueError("cannot decode an empty tag list")
    tags = [BiesTag(t) for t in tags]
    spans: list[Span] = []
    open_start: int | None = None
    for i, tag in enumerate(tags):
        if tag is BiesTag.B:
            if open_start is not None:
                spans.append((open_start, i))
            open_start = i
        elif tag is BiesTag.I:
            if open_start is None:
                open_start = i
        elif tag is BiesTag.E:
            if open_start is None:
                spans.append((i, i + 1))
            else:
                spans.append((open_start, i + 1))
                open_start = None
        else:  # S
            if open_start is not None:
                spans.append((open_start, i))
                open_start = None
            spans.append((i, i + 1))
    if open_start is not None:
        spans.append((open_start, len(tags)))
    return spans


def enumerate_spans(n: int, max_width: int) -> list[Span]:
    """All candidate spans of width <= max_width, ascending by (l, r).

    Candidates with length above the cap are discarded outright, so a
    sentence of n tokens yields sum over l of min(max_width, n - l) spans.
    """
    if n < 1:
        raise ValueError(f"sentence length must be >= 1, got {n}")
    if max_width < 1:
        raise ValueError(f"max_width must be >= 1, got {max_width}")
    return [
        (l, r)
        for l in range(n)
        for r in range(l + 1, min(l + max_width, n) + 1)
    ]
