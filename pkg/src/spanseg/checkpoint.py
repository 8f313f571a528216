"""Checkpoint serialization.

A checkpoint is two files: a UTF-8 manifest at the given path and a raw
blob at path + ".bin". The manifest carries a version line, the system
kind, the language, the hyperparameter echo, the vocabulary (tokens in
id order, then characters), and one "param <name> <shape> <offset>" line
per stored array. The blob is the arrays' little-endian 64-bit floats
concatenated in manifest order; offsets count elements. Save followed by
load reproduces every value bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import BOS, EOS, UNK, Vocabulary
from .errors import FormatError
from .model import ENCODER_BILSTM, SpanSegConfig, SpanSegModel

MAGIC = "spanseg-checkpoint 1"

SYSTEM_SPANSEG = "spanseg"
SYSTEM_CRF = "crf"

STATIC_TABLE = "static.table"


@dataclass
class Checkpoint:
    system: str
    language: str
    config: dict[str, str]
    vocab: Vocabulary
    arrays: dict[str, np.ndarray]
    order: list[str]


def save_checkpoint(
    path: str,
    system: str,
    language: str,
    config: dict[str, str],
    vocab: Vocabulary,
    arrays: list[tuple[str, np.ndarray]],
) -> None:
    if system not in (SYSTEM_SPANSEG, SYSTEM_CRF):
        raise ValueError(f"unknown system {system!r}")
    lines = [MAGIC, f"system {system}", f"language {language}"]
    for key in sorted(config):
        value = config[key]
        if not value or any(c.isspace() for c in value):
            raise ValueError(f"config value for {key!r} must be a single token")
        lines.append(f"config {key} {value}")
    for token, tid in sorted(vocab.token_to_id.items(), key=lambda kv: kv[1]):
        if token in (UNK, BOS, EOS):
            continue
        lines.append(f"token {token}")
    for char, cid in sorted(vocab.char_to_id.items(), key=lambda kv: kv[1]):
        if char == UNK:
            continue
        lines.append(f"char {char}")
    offset = 0
    chunks = []
    seen = set()
    for name, arr in arrays:
        if name in seen:
            raise ValueError(f"duplicate array name {name!r}")
        seen.add(name)
        if arr.ndim < 1:
            raise ValueError(f"array {name!r} must have at least one dim")
        shape = "x".join(str(d) for d in arr.shape)
        lines.append(f"param {name} {shape} {offset}")
        data = np.ascontiguousarray(arr, dtype="<f8")
        chunks.append(data.tobytes())
        offset += arr.size
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(path + ".bin", "wb") as fh:
        for chunk in chunks:
            fh.write(chunk)


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise FormatError(f"not a checkpoint manifest: {path}")
    system = None
    language = None
    config: dict[str, str] = {}
    tokens: list[str] = []
    chars: list[str] = []
    params: list[tuple[str, tuple[int, ...], int]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        tag = parts[0]
        if tag == "system" and len(parts) == 2:
            system = parts[1]
        elif tag == "language" and len(parts) == 2:
            language = parts[1]
        elif tag == "config" and len(parts) == 3:
            config[parts[1]] = parts[2]
        elif tag == "token" and len(parts) == 2:
            tokens.append(parts[1])
        elif tag == "char" and len(parts) == 2:
            chars.append(parts[1])
        elif tag == "param" and len(parts) == 4:
            try:
                shape = tuple(int(d) for d in parts[2].split("x"))
                offset = int(parts[3])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: malformed param line {line!r}") from exc
            params.append((parts[1], shape, offset))
        else:
            raise FormatError(f"line {lineno}: malformed manifest line {line!r}")
    if system not in (SYSTEM_SPANSEG, SYSTEM_CRF):
        raise FormatError(f"manifest has no valid system line (got {system!r})")
    if language is None:
        raise FormatError("manifest has no language line")

    token_to_id = {UNK: 0, BOS: 1, EOS: 2}
    for token in tokens:
        if token in token_to_id:
            raise FormatError(f"duplicate vocabulary token {token!r}")
        token_to_id[token] = len(token_to_id)
    char_to_id = {UNK: 0}
    for char in chars:
        if char in char_to_id:
            raise FormatError(f"duplicate vocabulary character {char!r}")
        char_to_id[char] = len(char_to_id)
    vocab = Vocabulary(token_to_id=token_to_id, char_to_id=char_to_id)

    blob = np.fromfile(path + ".bin", dtype="<f8")
    arrays: dict[str, np.ndarray] = {}
    order: list[str] = []
    expected_offset = 0
    for name, shape, offset in params:
        if name in arrays:
            raise FormatError(f"duplicate param {name!r} in manifest")
        if offset != expected_offset:
            raise FormatError(
                f"param {name!r} offset {offset} does not follow the previous "
                f"array (expected {expected_offset})"
            )
        size = int(np.prod(shape))
        if offset + size > blob.size:
            raise FormatError(
                f"param {name!r} runs past the end of the blob "
                f"({offset + size} > {blob.size})"
            )
        values = blob[offset : offset + size].reshape(shape).copy()
        if not np.isfinite(values).all():
            raise FormatError(f"param {name!r} holds non-finite values")
        arrays[name] = values
        order.append(name)
        expected_offset = offset + size
    if expected_offset != blob.size:
        raise FormatError(
            f"blob holds {blob.size} values but the manifest covers {expected_offset}"
        )
    return Checkpoint(system, language, config, vocab, arrays, order)


def save_model(path: str, system: str, language: str, model) -> None:
    """Serialize a trained span or CRF model (its config, vocabulary, and
    every parameter, plus the frozen static table when one exists)."""
    arrays = [(p.name, p.data) for p in model.parameters()]
    if model.config.encoder_mode == ENCODER_BILSTM:
        arrays.append((STATIC_TABLE, model.encoder.static_matrix))
    save_checkpoint(path, system, language, model.config.to_dict(), model.vocab, arrays)


def load_model(path: str):
    """Rebuild the stored model; returns (model, system, language)."""
    from .crf import CrfModel

    ckpt = load_checkpoint(path)
    config = SpanSegConfig.from_dict(ckpt.config)
    arrays = dict(ckpt.arrays)
    static = arrays.pop(STATIC_TABLE, None)
    cls = SpanSegModel if ckpt.system == SYSTEM_SPANSEG else CrfModel
    model = cls(config, ckpt.vocab, static_matrix=static)
    stored = set(arrays)
    expected = {p.name for p in model.parameters()}
    if stored != expected:
        missing = sorted(expected - stored)
        extra = sorted(stored - expected)
        raise FormatError(
            f"checkpoint parameters do not match the model: missing {missing}, "
            f"unexpected {extra}"
        )
    for p in model.parameters():
        arr = arrays[p.name]
        if arr.shape != p.data.shape:
            raise FormatError(
                f"param {p.name!r} has shape {arr.shape}, model wants {p.data.shape}"
            )
        p.data = arr
    return model, ckpt.system, ckpt.language
