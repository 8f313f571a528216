"""Segmented corpus parsing, vocabularies, and feature file loaders.

Two corpus formats are supported, both UTF-8 with one sentence per line
and words separated by spaces:

* vietnamese: syllables within a word are joined by '_'
  ("hoc_sinh hoc sinh_hoc" is three words over five syllable tokens)
* chinese: each word is a run of characters; tokens are the individual
  Unicode scalar values

Runs of whitespace are collapsed and ends trimmed before parsing, so the
serialized form of a parsed sentence reproduces the normalized line.

Feature files (static embeddings, predicted BIES tags, contextual token
vectors) are aligned to a corpus purely by sentence order; the loaders
here validate that alignment eagerly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError
from .spans import Span, is_partition, spans_to_words, words_to_spans

VIETNAMESE = "vietnamese"
CHINESE = "chinese"

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"

WORD_SEPS = {VIETNAMESE: "_", CHINESE: ""}


@dataclass
class SegmentedSentence:
    """A token sequence plus the span partition that groups it into words."""

    tokens: list[str]
    gold_spans: list[Span]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("sentence has no tokens")
        if not is_partition(self.gold_spans, len(self.tokens)):
            raise ValueError(
                f"gold spans {self.gold_spans} do not partition "
                f"[0, {len(self.tokens)})"
            )

    def __len__(self) -> int:
        return len(self.tokens)

    def words(self, format_tag: str) -> list[str]:
        return spans_to_words(self.gold_spans, self.tokens, WORD_SEPS[format_tag])


@dataclass
class Corpus:
    sentences: list[SegmentedSentence]
    format_tag: str

    def __post_init__(self) -> None:
        if self.format_tag not in WORD_SEPS:
            raise ValueError(f"unknown corpus format {self.format_tag!r}")

    def __len__(self) -> int:
        return len(self.sentences)


def _where(lineno: int | None) -> str:
    return f"line {lineno}: " if lineno is not None else ""


def parse_vietnamese_line(line: str, lineno: int | None = None) -> SegmentedSentence:
    """Parse one sentence in the underscore-joined syllable format."""
    words = line.split()
    if not words:
        raise FormatError(f"{_where(lineno)}empty sentence")
    tokens: list[str] = []
    lengths: list[int] = []
    for word in words:
        syllables = word.split("_")
        if any(not s for s in syllables):
            raise FormatError(
                f"{_where(lineno)}word {word!r} has an empty syllable"
            )
        tokens.extend(syllables)
        lengths.append(len(syllables))
    return SegmentedSentence(tokens, words_to_spans(lengths))


def parse_chinese_line(line: str, lineno: int | None = None) -> SegmentedSentence:
    """Parse one sentence in the space-separated word, character-token format."""
    words = line.split()
    if not words:
        raise FormatError(f"{_where(lineno)}empty sentence")
    tokens: list[str] = []
    lengths: list[int] = []
    for word in words:
        chars = list(word)
        tokens.extend(chars)
        lengths.append(len(chars))
    return SegmentedSentence(tokens, words_to_spans(lengths))


_PARSERS = {VIETNAMESE: parse_vietnamese_line, CHINESE: parse_chinese_line}


def parse_line(line: str, format_tag: str, lineno: int | None = None) -> SegmentedSentence:
    return _PARSERS[format_tag](line, lineno)


def serialize_sentence(sentence: SegmentedSentence, format_tag: str) -> str:
    """Inverse of parse_line, up to whitespace normalization."""
    return " ".join(sentence.words(format_tag))


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def load_corpus(path: str, format_tag: str) -> Corpus:
    parser = _PARSERS[format_tag]
    sentences = [parser(line, lineno=i + 1) for i, line in enumerate(_read_lines(path))]
    return Corpus(sentences, format_tag)


def save_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in corpus.sentences:
            fh.write(serialize_sentence(sentence, corpus.format_tag) + "\n")


@dataclass
class Vocabulary:
    """Token, character, and word inventories of a training corpus.

    Ids are dense and assigned in first-seen order after the reserved
    entries, so two builds over the same corpus agree exactly.
    """

    token_to_id: dict[str, int] = field(default_factory=dict)
    char_to_id: dict[str, int] = field(default_factory=dict)
    word_set: set[str] = field(default_factory=set)
    token_counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.token_to_id:
            self.token_to_id = {UNK: 0, BOS: 1, EOS: 2}
        if not self.char_to_id:
            self.char_to_id = {UNK: 0}

    @property
    def n_tokens(self) -> int:
        return len(self.token_to_id)

    @property
    def n_chars(self) -> int:
        return len(self.char_to_id)

    def token_id(self, token: str) -> int:
        return self.token_to_id.get(token, self.token_to_id[UNK])

    def char_id(self, char: str) -> int:
        return self.char_to_id.get(char, self.char_to_id[UNK])


def build_vocab(corpus: Corpus) -> Vocabulary:
    """Register every token, character, and word of the corpus.

    Single-threaded on purpose: id assignment follows first-seen order.
    """
    if not corpus.sentences:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    vocab = Vocabulary()
    sep = WORD_SEPS[corpus.format_tag]
    for sentence in corpus.sentences:
        for token in sentence.tokens:
            if token not in vocab.token_to_id:
                vocab.token_to_id[token] = len(vocab.token_to_id)
            vocab.token_counts[token] = vocab.token_counts.get(token, 0) + 1
            for char in token:
                if char not in vocab.char_to_id:
                    vocab.char_to_id[char] = len(vocab.char_to_id)
        for word in spans_to_words(sentence.gold_spans, sentence.tokens, sep):
            vocab.word_set.add(word)
    return vocab


def oov_rate(train_vocab: Vocabulary, eval_corpus: Corpus) -> float:
    """Fraction of gold word occurrences unseen in the training word set."""
    sep = WORD_SEPS[eval_corpus.format_tag]
    total = 0
    unseen = 0
    for sentence in eval_corpus.sentences:
        for word in spans_to_words(sentence.gold_spans, sentence.tokens, sep):
            total += 1
            if word not in train_vocab.word_set:
                unseen += 1
    if total == 0:
        raise ValueError("evaluation corpus contains no words")
    return unseen / total


def corpus_stats(corpus: Corpus) -> dict[str, int]:
    """Sentence/token/word/character counts and type counts."""
    sep = WORD_SEPS[corpus.format_tag]
    tokens = 0
    words = 0
    chars = 0
    token_types: set[str] = set()
    word_types: set[str] = set()
    char_types: set[str] = set()
    for sentence in corpus.sentences:
        tokens += len(sentence.tokens)
        words += len(sentence.gold_spans)
        for token in sentence.tokens:
            chars += len(token)
            token_types.add(token)
            char_types.update(token)
        word_types.update(spans_to_words(sentence.gold_spans, sentence.tokens, sep))
    return {
        "sentences": len(corpus.sentences),
        "tokens": tokens,
        "words": words,
        "characters": chars,
        "token_types": len(token_types),
        "word_types": len(word_types),
        "character_types": len(char_types),
    }


class StaticEmbeddings:
    """Frozen token vectors; unseen tokens map to the zero vector."""

    def __init__(self, table: dict[str, np.ndarray], dim: int):
        self.table = table
        self.dim = dim
        self._zero = np.zeros(dim)

    def lookup(self, token: str) -> np.ndarray:
        return self.table.get(token, self._zero)

    def __contains__(self, token: str) -> bool:
        return token in self.table


def load_static_embeddings(path: str) -> StaticEmbeddings:
    """Read the "<count> <dim>" header format of plain-text embeddings."""
    lines = _read_lines(path)
    if not lines:
        raise FormatError("embedding file is empty")
    header = lines[0].split()
    if len(header) != 2:
        raise FormatError(f"line 1: malformed header {lines[0]!r}")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError as exc:
        raise FormatError(f"line 1: malformed header {lines[0]!r}") from exc
    if len(lines) - 1 != count:
        raise FormatError(
            f"header declares {count} rows but file has {len(lines) - 1}"
        )
    table: dict[str, np.ndarray] = {}
    for row, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != dim + 1:
            raise FormatError(
                f"line {row}: expected {dim} values, got {len(parts) - 1}"
            )
        token = parts[0]
        if token in table:
            raise FormatError(f"line {row}: duplicate token {token!r}")
        try:
            table[token] = np.array([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise FormatError(f"line {row}: non-numeric value") from exc
    return StaticEmbeddings(table, dim)


_BIES_SYMBOLS = frozenset("BIES")


def load_bies_file(path: str, corpus: Corpus) -> list[list[str]]:
    """Load per-sentence predicted BIES tags, one space-separated line each."""
    lines = _read_lines(path)
    if len(lines) != len(corpus.sentences):
        raise FormatError(
            f"tag file has {len(lines)} lines for {len(corpus.sentences)} sentences"
        )
    all_tags: list[list[str]] = []
    for i, (line, sentence) in enumerate(zip(lines, corpus.sentences)):
        tags = line.split()
        if len(tags) != len(sentence.tokens):
            raise FormatError(
                f"sentence {i}: {len(tags)} tags for {len(sentence.tokens)} tokens"
            )
        for tag in tags:
            if tag not in _BIES_SYMBOLS:
                raise FormatError(f"sentence {i}: unknown tag {tag!r}")
        all_tags.append(tags)
    return all_tags


def load_contextual_file(path: str, corpus: Corpus) -> list[np.ndarray]:
    """Load per-sentence contextual vectors.

    Each record is a "# <sentence_index> <n> <d>" header, n rows of d
    floats, and a blank line. A record for a sentence of k tokens may
    carry either k rows (one vector per token) or k + 2 rows (sentinel
    begin/end rows included); anything else is rejected. Consumers that
    need one layout call token_rows / sentinel_rows.
    """
    lines = _read_lines(path)
    records: list[np.ndarray] = []
    pos = 0
    for idx, sentence in enumerate(corpus.sentences):
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise FormatError(f"record {idx}: missing")
        header = lines[pos].split()
        if len(header) != 4 or header[0] != "#":
            raise FormatError(f"record {idx}: malformed header {lines[pos]!r}")
        try:
            rec_idx, n_rows, dim = int(header[1]), int(header[2]), int(header[3])
        except ValueError as exc:
            raise FormatError(f"record {idx}: malformed header {lines[pos]!r}") from exc
        if rec_idx != idx:
            raise FormatError(f"record {idx}: header index {rec_idx} out of order")
        k = len(sentence.tokens)
        if n_rows not in (k, k + 2):
            raise FormatError(
                f"record {idx}: {n_rows} rows for a {k}-token sentence"
            )
        pos += 1
        if pos + n_rows > len(lines):
            raise FormatError(f"record {idx}: truncated after {len(lines) - pos} rows")
        rows = []
        for r in range(n_rows):
            values = lines[pos + r].split()
            if len(values) != dim:
                raise FormatError(
                    f"record {idx}: row {r} has {len(values)} values, expected {dim}"
                )
            try:
                rows.append([float(v) for v in values])
            except ValueError as exc:
                raise FormatError(f"record {idx}: row {r} non-numeric") from exc
        pos += n_rows
        records.append(np.array(rows))
    while pos < len(lines):
        if lines[pos].strip():
            raise FormatError(
                f"trailing record beyond the {len(corpus.sentences)} corpus sentences"
            )
        pos += 1
    return records


def token_rows(record: np.ndarray, n_tokens: int) -> np.ndarray:
    """One contextual vector per token, stripping sentinel rows if present."""
    if record.shape[0] == n_tokens:
        return record
    if record.shape[0] == n_tokens + 2:
        return record[1:-1]
    raise ValueError(
        f"record has {record.shape[0]} rows for a {n_tokens}-token sentence"
    )


def sentinel_rows(record: np.ndarray, n_tokens: int) -> np.ndarray:
    """The sentinel-augmented layout (n + 2 rows), required as-is."""
    if record.shape[0] != n_tokens + 2:
        raise ValueError(
            f"need {n_tokens + 2} rows including sentinels, got {record.shape[0]}"
        )
    return record
