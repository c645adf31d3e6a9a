"""Configuration loading with CLI > environment > file precedence.

The file format is plain ``key = value`` lines with '#' comments; the
environment override for a key is ``FIGURA_<KEY uppercased>``. Unknown
keys in the file are rejected so typos fail loudly.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping, Optional, Union

from .errors import DataError

ENV_PREFIX = "FIGURA_"


@dataclass
class Config:
    # connecting score and ranking
    beta: float = 0.01
    connector_k: int = 5
    # lexicon selection
    expansion_k: int = 5
    min_freq: float = 1e-5
    top_by_freq: int = 10000
    top_by_conc: int = 3000
    # adjective validation and sentence screening
    describe_threshold: int = 3
    salience_threshold: int = 1
    min_sentence_tokens: int = 5
    max_sentence_tokens: int = 40
    # rendering
    default_template: str = "as_as"
    # trigger heuristic
    trigger_threshold: float = 0.5
    weight_keyword: float = 0.5
    weight_topic: float = 0.4
    weight_qa: float = 0.1
    trigger_neighbor_k: int = 5
    # dialogue protocol
    follow_up_window: int = 1
    seed: int = 0
    fallback_reply: str = "Tell me more."
    # loading behavior
    lowercase: bool = True
    # artifact paths (empty = use packaged defaults where they exist)
    embeddings_path: str = ""
    pos_path: str = ""
    stopwords_path: str = ""
    templates_path: str = ""
    mass_nouns_path: str = ""
    corpus_path: str = ""
    inventory_path: str = ""
    event_log_path: str = "events.jsonl"

    @property
    def trigger_weights(self) -> tuple[float, float, float]:
        return (self.weight_keyword, self.weight_topic, self.weight_qa)


def _parse_value(raw: str, target_type: type):
    raw = raw.strip()
    if target_type is bool:
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return target_type(raw)


def read_config_file(path: Union[str, Path]) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' comments and blank lines ignored."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise DataError(f"{path}: expected 'key = value' at line {lineno}")
            key, value = stripped.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def load_config(
    path: Optional[Union[str, Path]] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, object]] = None,
) -> Config:
    """Build a Config with precedence overrides (CLI) > env > file > defaults."""
    env = os.environ if env is None else env
    config = Config()
    by_name = {f.name: f for f in fields(Config)}

    def apply(name: str, raw, origin: str) -> None:
        if name not in by_name:
            raise DataError(f"unknown configuration key {name!r} (from {origin})")
        f = by_name[name]
        if isinstance(raw, str):
            try:
                value = _parse_value(raw, type(getattr(config, name)))
            except ValueError as exc:
                raise DataError(f"bad value for {name!r} (from {origin}): {exc}") from exc
        else:
            value = raw
        setattr(config, name, value)

    if path is not None:
        if not Path(path).exists():
            raise DataError(f"config file not found: {path}")
        for key, value in read_config_file(path).items():
            apply(key, value, str(path))
    for name in by_name:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            apply(name, env[env_key], f"${env_key}")
    for name, value in (overrides or {}).items():
        if value is not None:
            apply(name, value, "command line")
    return config
