"""Corpus evidence mining over pre-parsed CoNLL-U input.

Stands in for live web-search validation: a local dependency-parsed corpus
is indexed by lemma, then queried for the usage patterns that validate
connecting words: adjective attributive/predicative/simile counts, and
subject-verb / subject-predicate-object evidence sentences whose best match
(by mean embedding distance to the source) becomes a metaphor explanation.

Dependency relation labels default to Universal Dependencies; the mapping
is configuration so other tagsets can be plugged in.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Iterable, Optional, Union

from .embeddings import EmbeddingStore
from .errors import LoadError

logger = logging.getLogger(__name__)

SUBJECT_VERB = "subject-verb"
SUBJECT_PREDICATE_OBJECT = "subject-predicate-object"
RELATION_KINDS = (SUBJECT_VERB, SUBJECT_PREDICATE_OBJECT)

MAX_EXPLANATION_DISTANCE = 2.0


@dataclass(frozen=True)
class RelationConfig:
    """Dependency-label sets used by the pattern matchers (UD defaults)."""

    subject: frozenset = frozenset({"nsubj"})
    adjectival_modifier: frozenset = frozenset({"amod"})
    copula: frozenset = frozenset({"cop"})
    direct_object: frozenset = frozenset({"obj"})


DEFAULT_RELATIONS = RelationConfig()


@dataclass(frozen=True)
class Token:
    """One syntactic word: surface form, lemma, UPOS, 1-based head id (0 = root), deprel."""

    form: str
    lemma: str
    upos: str
    head: int
    deprel: str

    def key(self) -> str:
        """Lowercased lemma, falling back to the form when the lemma is missing."""
        lemma = self.lemma if self.lemma and self.lemma != "_" else self.form
        return lemma.lower()

    def base_deprel(self) -> str:
        return self.deprel.split(":")[0]


@dataclass(frozen=True)
class ParsedSentence:
    """A dependency-parsed sentence with exactly one root token."""

    id: int
    surface: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def lemma_keys(self) -> set[str]:
        return {t.key() for t in self.tokens}

    def children(self, head_id: int) -> list[int]:
        """1-based ids of tokens whose head is `head_id`."""
        return [i + 1 for i, t in enumerate(self.tokens) if t.head == head_id]

    def subtree(self, token_id: int) -> list[int]:
        """1-based ids of the subtree rooted at `token_id`, in sentence order."""
        keep = {token_id}
        changed = True
        while changed:
            changed = False
            for i, t in enumerate(self.tokens, start=1):
                if t.head in keep and i not in keep:
                    keep.add(i)
                    changed = True
        return sorted(keep)


@dataclass(frozen=True)
class PatternCounts:
    """Adjective usage evidence: attributive, predicative, and simile counts."""

    attributive: int
    predicative: int
    simile: int

    def __post_init__(self):
        if min(self.attributive, self.predicative, self.simile) < 0:
            raise ValueError("pattern counts must be non-negative")


@dataclass(frozen=True)
class EvidenceSentence:
    """A corpus sentence supporting a connector-anchor relation."""

    sentence: ParsedSentence
    matched_keyword: str
    relation: str
    distance_to_source: float = 0.0


@dataclass
class CorpusIndex:
    """Immutable-after-build sentence list with a lemma -> sentence-id index."""

    sentences: list[ParsedSentence] = field(default_factory=list)
    token_index: dict[str, set[int]] = field(default_factory=dict)
    skipped_blocks: int = 0

    def __len__(self) -> int:
        return len(self.sentences)

    def sentences_with(self, *lemmas: str) -> list[ParsedSentence]:
        """Sentences containing every given lemma, in corpus order."""
        ids: Optional[set[int]] = None
        for lemma in lemmas:
            found = self.token_index.get(lemma.lower(), set())
            ids = found.copy() if ids is None else ids & found
            if not ids:
                return []
        return [self.sentences[i] for i in sorted(ids or ())]


def _parse_block(block_lines: list[str], sent_id: int) -> ParsedSentence:
    """Parse one CoNLL-U block; raises ValueError on any structural defect."""
    surface: Optional[str] = None
    tokens: list[Token] = []
    for line in block_lines:
        if line.startswith("#"):
            if line[1:].strip().startswith("text ="):
                surface = line.split("=", 1)[1].strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ValueError(f"expected 10 columns, got {len(cols)}")
        idx = cols[0]
        if "-" in idx or "." in idx:
            continue  # multiword-token range or empty node: not a syntactic word
        if int(idx) != len(tokens) + 1:
            raise ValueError(f"non-consecutive token id {idx}")
        head = int(cols[6])
        tokens.append(Token(form=cols[1], lemma=cols[2], upos=cols[3], head=head, deprel=cols[7]))
    if not tokens:
        raise ValueError("no tokens in block")
    n = len(tokens)
    roots = sum(1 for t in tokens if t.head == 0)
    if roots != 1:
        raise ValueError(f"{roots} roots (exactly one required)")
    for t in tokens:
        if not 0 <= t.head <= n:
            raise ValueError(f"head index {t.head} out of range [0, {n}]")
    if surface is None:
        surface = " ".join(t.form for t in tokens)
    return ParsedSentence(id=sent_id, surface=surface, tokens=tuple(tokens))


def build_corpus_index(source: Union[str, Path, BinaryIO, io.TextIOBase]) -> CorpusIndex:
    """Build a CorpusIndex from a CoNLL-U stream or path.

    Blocks are separated by blank lines; '#' lines are comments; the
    ``# text =`` comment, when present, supplies the surface form.
    Malformed blocks (wrong column count, zero or multiple roots, bad head
    indices) are skipped and counted; an input with zero valid sentences
    is a LoadError.
    """
    if isinstance(source, (str, Path)):
        text = open(source, encoding="utf-8")
    elif isinstance(source, io.TextIOBase):
        text = source
    else:
        text = io.TextIOWrapper(source, encoding="utf-8")

    index = CorpusIndex()
    block: list[str] = []

    def flush() -> None:
        if not any(line and not line.startswith("#") for line in block):
            block.clear()
            return
        try:
            sentence = _parse_block(block, len(index.sentences))
        except (ValueError, IndexError) as exc:
            index.skipped_blocks += 1
            logger.warning("skipped malformed CoNLL-U block: %s", exc)
        else:
            index.sentences.append(sentence)
            for token in sentence.tokens:
                index.token_index.setdefault(token.key(), set()).add(sentence.id)
        block.clear()

    with text:
        for raw in text:
            line = raw.rstrip("\n").rstrip("\r")
            if line.strip() == "":
                flush()
            else:
                block.append(line)
        flush()

    if not index.sentences:
        raise LoadError("no valid sentences in CoNLL-U input")
    return index


def _looks_like_url(form: str) -> bool:
    lowered = form.lower()
    return "://" in lowered or lowered.startswith("www.") or lowered.startswith("http")


def is_valid_sentence(
    s: ParsedSentence,
    required_lemmas: Iterable[str],
    min_tokens: int = 5,
    max_tokens: int = 40,
) -> bool:
    """Screen out broken or off-topic sentences.

    A sentence passes iff its token count is within [min_tokens, max_tokens],
    it contains every required lemma, it has a single root, and no token
    looks like a URL.
    """
    n = len(s.tokens)
    if not min_tokens <= n <= max_tokens:
        return False
    if sum(1 for t in s.tokens if t.head == 0) != 1:
        return False
    if any(_looks_like_url(t.form) for t in s.tokens):
        return False
    keys = s.lemma_keys()
    return all(lemma.lower() in keys for lemma in required_lemmas)


def count_adjective_patterns(
    index: CorpusIndex,
    adjective: str,
    target: str,
    source: str,
    relations: RelationConfig = DEFAULT_RELATIONS,
) -> PatternCounts:
    """Count corpus evidence that an adjective describes the target and is salient for the source.

    attributive: sentences where an adjective-lemma token modifies a
    target-lemma token via an adjectival-modifier relation ("sweet love").
    predicative: sentences where a target-lemma token is the subject of an
    adjective-lemma token ("love is sweet", copular predicate).
    simile: occurrences of the surface pattern "as ADJ as" with the source
    lemma within the following two tokens ("as sweet as sugar").
    """
    adj = adjective.lower()
    tgt = target.lower()
    src = source.lower()

    attributive = 0
    predicative = 0
    for sent in index.sentences_with(adj, tgt):
        is_attr = False
        is_pred = False
        for tok in sent.tokens:
            if tok.key() == adj and tok.head >= 1:
                head = sent.tokens[tok.head - 1]
                if head.key() == tgt and tok.base_deprel() in relations.adjectival_modifier:
                    is_attr = True
            if tok.key() == tgt and tok.head >= 1:
                head = sent.tokens[tok.head - 1]
                if head.key() == adj and tok.base_deprel() in relations.subject:
                    is_pred = True
        attributive += is_attr
        predicative += is_pred

    simile = 0
    for sent in index.sentences_with(adj, src):
        forms = [t.form.lower() for t in sent.tokens]
        keys = [t.key() for t in sent.tokens]
        for i in range(len(forms) - 2):
            if forms[i] == "as" and keys[i + 1] == adj and forms[i + 2] == "as":
                window = keys[i + 3 : i + 5]
                if src in window:
                    simile += 1
    return PatternCounts(attributive=attributive, predicative=predicative, simile=simile)


def validate_adjective(
    counts: PatternCounts,
    describe_threshold: int = 3,
    salience_threshold: int = 1,
) -> bool:
    """True iff the adjective both describes the target and is salient for the source.

    Describing evidence is attributive + predicative counts; salience
    evidence is the simile count. Both must reach their thresholds.
    """
    if describe_threshold < 0 or salience_threshold < 0:
        raise ValueError("thresholds must be >= 0")
    return (
        counts.attributive + counts.predicative >= describe_threshold
        and counts.simile >= salience_threshold
    )


def _match_subject_verb(
    sent: ParsedSentence, connector: str, anchor: str, relations: RelationConfig
) -> bool:
    for tok in sent.tokens:
        if tok.key() != anchor or tok.base_deprel() not in relations.subject or tok.head < 1:
            continue
        head = sent.tokens[tok.head - 1]
        if head.upos == "VERB" and head.key() == connector:
            return True
    return False


def _match_spo(
    sent: ParsedSentence, connector: str, anchor: str, relations: RelationConfig
) -> bool:
    for i, verb in enumerate(sent.tokens, start=1):
        if verb.upos != "VERB":
            continue
        has_subject = False
        has_object = False
        for tok in sent.tokens:
            if tok.head != i:
                continue
            if tok.key() == anchor and tok.base_deprel() in relations.subject:
                has_subject = True
            if tok.key() == connector and tok.base_deprel() in relations.direct_object:
                has_object = True
        if has_subject and has_object:
            return True
    return False


def find_relation_sentences(
    index: CorpusIndex,
    connector: str,
    anchor: str,
    relation: str,
    relations: RelationConfig = DEFAULT_RELATIONS,
    min_tokens: int = 5,
    max_tokens: int = 40,
) -> list[EvidenceSentence]:
    """Corpus sentences where `anchor` and `connector` stand in the given relation.

    subject-verb: anchor is the nominal subject of a verb with the
    connector's lemma. subject-predicate-object: anchor is the subject of
    a verb whose direct object has the connector's lemma. Results must
    pass is_valid_sentence for both lemmas; duplicates (identical surface)
    are removed keeping the first, and output follows corpus order.
    """
    if relation not in RELATION_KINDS:
        raise ValueError(f"unknown relation kind {relation!r}")
    conn = connector.lower()
    anch = anchor.lower()
    match = _match_subject_verb if relation == SUBJECT_VERB else _match_spo

    results: list[EvidenceSentence] = []
    seen_surfaces: set[str] = set()
    for sent in index.sentences_with(conn, anch):
        if not is_valid_sentence(sent, (conn, anch), min_tokens, max_tokens):
            continue
        if not match(sent, conn, anch, relations):
            continue
        if sent.surface in seen_surfaces:
            continue
        seen_surfaces.add(sent.surface)
        results.append(
            EvidenceSentence(sentence=sent, matched_keyword=anch, relation=relation)
        )
    return results


def rank_explanations(
    store: EmbeddingStore,
    sentences: list[EvidenceSentence],
    source: str,
    stopwords: Iterable[str],
) -> list[EvidenceSentence]:
    """Order evidence sentences by mean lemma distance to the source, ascending.

    Each sentence's distance is the mean semantic distance to `source` over
    its non-stopword, in-vocabulary lemma occurrences; a sentence with no
    scorable lemma gets the maximum distance 2. Ties break by sentence id.
    """
    stop = {w.lower() for w in stopwords}

    def score(ev: EvidenceSentence) -> float:
        dists = [
            store.distance(tok.key(), source)
            for tok in ev.sentence.tokens
            if tok.key() not in stop and tok.key() in store
        ]
        if not dists:
            return MAX_EXPLANATION_DISTANCE
        return sum(dists) / len(dists)

    rescored = [replace(ev, distance_to_source=score(ev)) for ev in sentences]
    rescored.sort(key=lambda ev: (ev.distance_to_source, ev.sentence.id))
    return rescored
