"""Target and source concept selection from themes, frequencies, and concreteness.

Targets are abstract, conversation-frequent concepts: a theme list is
expanded with each theme's nearest embedding neighbors, then filtered by
chat-log frequency. Sources are frequent nouns ranked by concreteness.
Frequencies are fractions of chat-log utterances containing the word, in
[0, 1]; concreteness ratings follow the 1-5 lexicon convention.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .embeddings import EmbeddingStore

logger = logging.getLogger(__name__)

POS_VALUES = ("noun", "adjective", "verb", "other")

CONCRETENESS_MIN = 1.0
CONCRETENESS_MAX = 5.0


@dataclass(frozen=True)
class ConceptEntry:
    """A word with its POS tag, utterance frequency, and optional concreteness."""

    word: str
    pos: str = "other"
    frequency: float = 0.0
    concreteness: Optional[float] = None

    def __post_init__(self):
        if self.pos not in POS_VALUES:
            raise ValueError(f"invalid POS {self.pos!r} for {self.word!r}")
        if not 0.0 <= self.frequency <= 1.0:
            raise ValueError(f"frequency out of [0,1] for {self.word!r}: {self.frequency}")
        if self.concreteness is not None and not (
            CONCRETENESS_MIN <= self.concreteness <= CONCRETENESS_MAX
        ):
            raise ValueError(f"concreteness out of [1,5] for {self.word!r}: {self.concreteness}")


@dataclass(frozen=True)
class TargetSet:
    """Target concepts ordered by descending frequency, no duplicates."""

    entries: tuple[ConceptEntry, ...]

    def words(self) -> list[str]:
        return [e.word for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SourceSet:
    """Source nouns ordered by descending concreteness, no duplicates."""

    entries: tuple[ConceptEntry, ...]

    def words(self) -> list[str]:
        return [e.word for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def select_targets(
    themes: Sequence[str],
    store: EmbeddingStore,
    freq: Mapping[str, float],
    expansion_k: int = 5,
    min_freq: float = 1e-5,
    pos: Optional[Mapping[str, str]] = None,
) -> TargetSet:
    """Build the target set from a theme list.

    The candidate pool is the themes plus, for each theme present in the
    store, its `expansion_k` nearest neighbors over the full vocabulary.
    The pool is deduplicated, then words absent from `freq` or below
    `min_freq` are dropped. Result is ordered by descending frequency,
    ties lexicographic.
    """
    if not themes:
        raise ValueError("themes must be nonempty")
    if expansion_k < 0:
        raise ValueError(f"expansion_k must be >= 0, got {expansion_k}")
    pool: list[str] = []
    seen: set[str] = set()

    def add(word: str) -> None:
        w = word.lower()
        if w not in seen:
            seen.add(w)
            pool.append(w)

    for theme in themes:
        add(theme)
        if expansion_k > 0 and theme in store:
            for neighbor, _ in store.nearest_neighbors(theme, expansion_k):
                add(neighbor)

    kept = [w for w in pool if freq.get(w, 0.0) >= min_freq and w in freq]
    kept.sort(key=lambda w: (-freq[w], w))
    entries = tuple(
        ConceptEntry(
            word=w,
            pos=(pos or {}).get(w, "other"),
            frequency=freq[w],
        )
        for w in kept
    )
    if not entries:
        logger.warning("all %d target candidates were filtered out (min_freq=%g)", len(pool), min_freq)
    return TargetSet(entries)


def select_sources(
    freq: Mapping[str, float],
    pos: Mapping[str, str],
    concreteness: Mapping[str, float],
    top_by_freq: int = 10000,
    top_by_conc: int = 3000,
) -> SourceSet:
    """Build the source set: frequent nouns ranked by concreteness.

    Takes the `top_by_freq` most frequent nouns that carry a concreteness
    rating, then keeps the `top_by_conc` most concrete of those. Ordering
    is descending concreteness, ties lexicographic. Out-of-range ratings
    are clamped into [1, 5] with a warning.
    """
    if top_by_conc > top_by_freq:
        raise ValueError(f"top_by_conc ({top_by_conc}) must be <= top_by_freq ({top_by_freq})")
    rated_nouns = [
        w for w in freq
        if pos.get(w) == "noun" and w in concreteness
    ]
    rated_nouns.sort(key=lambda w: (-freq[w], w))
    pool = rated_nouns[:top_by_freq]
    if len(pool) < top_by_conc:
        logger.warning(
            "only %d rated nouns available, fewer than top_by_conc=%d", len(pool), top_by_conc
        )

    def rating(w: str) -> float:
        r = concreteness[w]
        if not CONCRETENESS_MIN <= r <= CONCRETENESS_MAX:
            clamped = min(max(r, CONCRETENESS_MIN), CONCRETENESS_MAX)
            logger.warning("concreteness %g for %r clamped to %g", r, w, clamped)
            return clamped
        return r

    ratings = {w: rating(w) for w in pool}
    pool.sort(key=lambda w: (-ratings[w], w))
    entries = tuple(
        ConceptEntry(word=w, pos="noun", frequency=freq[w], concreteness=ratings[w])
        for w in pool[:top_by_conc]
    )
    return SourceSet(entries)


# ---------------------------------------------------------------------------
# File ingestion (all UTF-8)
# ---------------------------------------------------------------------------


def read_token_file(path: Union[str, Path]) -> list[str]:
    """One token per line; blank lines and '#' comments ignored."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                tokens.append(line.lower())
    return tokens


def _read_tsv(path: Union[str, Path]) -> list[tuple[str, str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}: expected 2 tab-separated columns at line {lineno}")
            rows.append((parts[0].lower(), parts[1]))
    return rows


def read_frequency_tsv(path: Union[str, Path]) -> dict[str, float]:
    """``token<TAB>frequency`` rows; duplicates keep the first occurrence."""
    out: dict[str, float] = {}
    for token, value in _read_tsv(path):
        out.setdefault(token, float(value))
    return out


def read_concreteness_tsv(path: Union[str, Path]) -> dict[str, float]:
    """``token<TAB>rating`` rows; duplicates keep the first occurrence."""
    out: dict[str, float] = {}
    for token, value in _read_tsv(path):
        out.setdefault(token, float(value))
    return out


def read_pos_tsv(path: Union[str, Path]) -> dict[str, str]:
    """``token<TAB>pos`` rows; POS values outside the known set map to 'other'."""
    out: dict[str, str] = {}
    for token, value in _read_tsv(path):
        value = value.strip().lower()
        out.setdefault(token, value if value in POS_VALUES else "other")
    return out
