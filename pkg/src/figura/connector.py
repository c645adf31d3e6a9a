"""Connecting-word scoring and ranking for (target, source) pairs.

A connecting word X for target T and source V is scored as

    score(X | T, V) = dist(T, X) + dist(V, X) + ln(|dist(T, X) - dist(V, X)| + beta)

with dist the embedding store's cosine distance. Lower is better: the sum
rewards closeness to both concepts and the log term rewards a balanced
placement between them. Candidates must also pass a connectivity screen,
dist(T, X) < dist(T, V) and dist(V, X) < dist(T, V), before ranking.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping

from .embeddings import EmbeddingStore

logger = logging.getLogger(__name__)

DEFAULT_BETA = 0.01

CONNECTOR_POS = ("adjective", "verb", "noun")


@dataclass(frozen=True)
class ScoreBreakdown:
    """Components of a connecting score; total = dist_target + dist_source + ln(imbalance + beta)."""

    dist_target: float
    dist_source: float
    imbalance: float
    beta: float
    total: float


@dataclass(frozen=True)
class ConnectingCandidate:
    """A scored connecting word for a (target, source) pair."""

    target: str
    source: str
    word: str
    pos: str
    score: ScoreBreakdown

    def __post_init__(self):
        if self.word in (self.target, self.source):
            raise ValueError(f"connecting word {self.word!r} equals target or source")
        if self.pos not in CONNECTOR_POS:
            raise ValueError(f"invalid connecting-word POS {self.pos!r}")


def connecting_score(
    store: EmbeddingStore,
    target: str,
    source: str,
    word: str,
    beta: float = DEFAULT_BETA,
) -> ScoreBreakdown:
    """Score `word` as a connector for (target, source); natural log, lower is better."""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    dist_t = store.distance(target, word)
    dist_v = store.distance(source, word)
    imbalance = abs(dist_t - dist_v)
    total = dist_t + dist_v + math.log(imbalance + beta)
    return ScoreBreakdown(
        dist_target=dist_t,
        dist_source=dist_v,
        imbalance=imbalance,
        beta=beta,
        total=total,
    )


def rank_connecting_words(
    store: EmbeddingStore,
    target: str,
    source: str,
    pos: str,
    pos_table: Mapping[str, str],
    k: int = 5,
    beta: float = DEFAULT_BETA,
) -> list[ConnectingCandidate]:
    """Rank vocabulary words of the given POS as connectors, best first.

    Candidates are vocabulary tokens whose `pos_table` entry equals `pos`,
    excluding target and source. Each must pass the connectivity screen
    (closer to both T and V than T and V are to each other); survivors are
    ordered by ascending total, ties lexicographic, and the best k returned.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if pos not in CONNECTOR_POS:
        raise ValueError(f"invalid connecting-word POS {pos!r}")
    dist_tv = store.distance(target, source)
    excluded = {store.normalize(target), store.normalize(source)}
    scored: list[ConnectingCandidate] = []
    for word in store.vocabulary:
        if word in excluded:
            continue
        if pos_table.get(word) != pos:
            continue
        breakdown = connecting_score(store, target, source, word, beta)
        if breakdown.dist_target < dist_tv and breakdown.dist_source < dist_tv:
            scored.append(
                ConnectingCandidate(target=target, source=source, word=word, pos=pos, score=breakdown)
            )
    if not scored:
        logger.info(
            "no %s candidates passed the connectivity screen for (%s, %s)", pos, target, source
        )
        return []
    scored.sort(key=lambda c: (c.score.total, c.word))
    return scored[:k]
