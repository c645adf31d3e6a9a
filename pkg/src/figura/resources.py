"""Access to the packaged default data files (themes, stopwords, templates)."""
from __future__ import annotations

from importlib import resources as importlib_resources


def _read_tokens(name: str) -> frozenset:
    text = importlib_resources.files("figura.data").joinpath(name).read_text("utf-8")
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def default_stopwords() -> frozenset:
    return _read_tokens("stopwords_en.txt")


def default_mass_nouns() -> frozenset:
    return _read_tokens("mass_nouns.txt")


def default_themes() -> list[str]:
    text = importlib_resources.files("figura.data").joinpath("themes.txt").read_text("utf-8")
    return [
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    ]
