"""Flat key=value run configuration files.

One pair per line; '#' starts a comment; blank lines are skipped. Keys
are drawn from a closed set (model hyperparameters plus file paths and
run-level switches); anything else is rejected by name, as are duplicate
keys and missing required keys.
"""

from __future__ import annotations

from dataclasses import fields

from .errors import ConfigError
from .model import SpanSegConfig

MODEL_KEYS = frozenset(f.name for f in fields(SpanSegConfig))

RUN_KEYS = frozenset(
    {
        "system",
        "language",
        "train",
        "dev",
        "test",
        "static_emb",
        "tag_file",
        "dev_tag_file",
        "ctx_file",
        "dev_ctx_file",
        "checkpoint",
        "output",
        "log",
        "oracle_gold",
    }
)

KNOWN_KEYS = MODEL_KEYS | RUN_KEYS


def parse_config_text(text: str) -> dict[str, str]:
    config: dict[str, str] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in config:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for key {key!r}")
        config[key] = value
    return config


def load_config(path: str) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def require(config: dict[str, str], key: str) -> str:
    if key not in config:
        raise ConfigError(f"missing required config key {key!r}")
    return config[key]


def model_config(
    config: dict[str, str], overrides: dict[str, str] | None = None
) -> SpanSegConfig:
    """Build the hyperparameter set from the model-relevant keys.

    `overrides` (seed from the environment, an inferred contextual dim)
    take precedence over the file.
    """
    merged = {k: v for k, v in config.items() if k in MODEL_KEYS}
    if overrides:
        merged.update(overrides)
    return SpanSegConfig.from_dict(merged)
