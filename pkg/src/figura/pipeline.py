"""End-to-end batch generation: connectors -> corpus evidence -> rendered metaphors.

Also owns the JSON-lines record schema used by the CLI `generate` output,
the service's /generate endpoint, and inventory loading for the chat
service. Records carry a schema_version field; evidence sentences are
serialized in full so an inventory round-trips losslessly.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .config import Config
from .connector import ConnectingCandidate, ScoreBreakdown, rank_connecting_words
from .embeddings import EmbeddingStore
from .errors import DataError
from .evidence import (
    SUBJECT_PREDICATE_OBJECT,
    SUBJECT_VERB,
    CorpusIndex,
    EvidenceSentence,
    ParsedSentence,
    Token,
    count_adjective_patterns,
    find_relation_sentences,
    rank_explanations,
    validate_adjective,
)
from .generator import (
    DEFAULT_MASS_NOUNS,
    GeneratedMetaphor,
    MetaphorTriplet,
    expression_forms,
    render_adjective,
    render_with_explanation,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GeneratedRecord:
    """A rendered metaphor together with the candidate score that produced it."""

    metaphor: GeneratedMetaphor
    candidate: ConnectingCandidate


def generate_metaphors(
    store: EmbeddingStore,
    index: CorpusIndex,
    pos_table: Mapping[str, str],
    targets: Sequence[str],
    sources: Sequence[str],
    stopwords: Iterable[str],
    config: Config,
    pos_filter: Optional[Sequence[str]] = None,
    limit: Optional[int] = None,
    templates: Optional[Mapping[str, str]] = None,
    mass_nouns: Optional[frozenset] = None,
) -> list[GeneratedRecord]:
    """Generate validated metaphors for every (target, source) pair.

    Per pair and POS category: rank connecting words, validate each against
    the corpus (adjectives by pattern counts, verbs and nouns by evidence
    sentences on both the target and the source side), and render survivors.
    Results are sorted by connecting score ascending; `limit`, when given,
    caps the list after sorting. Unknown targets or sources raise DataError.
    """
    mass = DEFAULT_MASS_NOUNS if mass_nouns is None else mass_nouns
    pos_list = tuple(pos_filter) if pos_filter else ("adjective", "verb", "noun")
    for pos in pos_list:
        if pos not in ("adjective", "verb", "noun"):
            raise DataError(f"unknown POS category {pos!r}")
    for token in list(targets) + list(sources):
        if token not in store:
            raise DataError(f"unknown token {token!r} (not in embedding vocabulary)")
    stop = list(stopwords)

    records: list[GeneratedRecord] = []
    for target in targets:
        for source in sources:
            if store.normalize(target) == store.normalize(source):
                continue
            for pos in pos_list:
                candidates = rank_connecting_words(
                    store, target, source, pos, pos_table,
                    k=config.connector_k, beta=config.beta,
                )
                for cand in candidates:
                    metaphor = _realize(
                        store, index, cand, stop, config, templates, mass
                    )
                    if metaphor is not None:
                        records.append(GeneratedRecord(metaphor=metaphor, candidate=cand))
    records.sort(key=lambda r: (r.candidate.score.total, r.metaphor.id))
    if limit is not None:
        records = records[: max(limit, 0)]
    return records


def _realize(
    store: EmbeddingStore,
    index: CorpusIndex,
    cand: ConnectingCandidate,
    stopwords: list,
    config: Config,
    templates: Optional[Mapping[str, str]],
    mass_nouns: frozenset,
) -> Optional[GeneratedMetaphor]:
    """Validate one candidate against the corpus and render it, or None."""
    if cand.pos == "adjective":
        counts = count_adjective_patterns(index, cand.word, cand.target, cand.source)
        if not validate_adjective(counts, config.describe_threshold, config.salience_threshold):
            return None
        triplet = MetaphorTriplet(
            target=cand.target, source=cand.source, connector=cand.word, pos="adjective"
        )
        return render_adjective(triplet, config.default_template, templates, mass_nouns)

    relation = SUBJECT_VERB if cand.pos == "verb" else SUBJECT_PREDICATE_OBJECT
    kwargs = dict(
        relation=relation,
        min_tokens=config.min_sentence_tokens,
        max_tokens=config.max_sentence_tokens,
    )
    target_sents = find_relation_sentences(index, cand.word, cand.target, **kwargs)
    source_sents = find_relation_sentences(index, cand.word, cand.source, **kwargs)
    if not target_sents or not source_sents:
        return None
    ranked = rank_explanations(store, target_sents, cand.source, stopwords)
    triplet = MetaphorTriplet(
        target=cand.target, source=cand.source, connector=cand.word,
        pos=cand.pos, evidence=ranked[0],
    )
    try:
        return render_with_explanation(triplet, mass_nouns)
    except ValueError as exc:
        logger.info("dropped %s/%s/%s: %s", cand.target, cand.source, cand.word, exc)
        return None


# ---------------------------------------------------------------------------
# JSON-lines record schema
# ---------------------------------------------------------------------------


def record_to_dict(record: GeneratedRecord) -> dict:
    m = record.metaphor
    t = m.triplet
    s = record.candidate.score
    out = {
        "schema_version": SCHEMA_VERSION,
        "id": m.id,
        "target": t.target,
        "source": t.source,
        "connector": t.connector,
        "pos": t.pos,
        "template_id": m.template_id,
        "text": m.text,
        "comparison": m.comparison,
        "explanation": m.explanation,
        "score": {
            "dist_target": s.dist_target,
            "dist_source": s.dist_source,
            "imbalance": s.imbalance,
            "beta": s.beta,
            "total": s.total,
        },
        "evidence": None,
    }
    if t.evidence is not None:
        ev = t.evidence
        out["evidence"] = {
            "matched_keyword": ev.matched_keyword,
            "relation": ev.relation,
            "distance_to_source": ev.distance_to_source,
            "sentence": {
                "id": ev.sentence.id,
                "surface": ev.sentence.surface,
                "tokens": [
                    [tok.form, tok.lemma, tok.upos, tok.head, tok.deprel]
                    for tok in ev.sentence.tokens
                ],
            },
        }
    return out


def record_from_dict(data: Mapping) -> GeneratedRecord:
    evidence = None
    if data.get("evidence"):
        ev = data["evidence"]
        sent = ev["sentence"]
        evidence = EvidenceSentence(
            sentence=ParsedSentence(
                id=int(sent["id"]),
                surface=sent["surface"],
                tokens=tuple(
                    Token(form=f, lemma=l, upos=u, head=int(h), deprel=d)
                    for f, l, u, h, d in sent["tokens"]
                ),
            ),
            matched_keyword=ev["matched_keyword"],
            relation=ev["relation"],
            distance_to_source=float(ev["distance_to_source"]),
        )
    triplet = MetaphorTriplet(
        target=data["target"],
        source=data["source"],
        connector=data["connector"],
        pos=data["pos"],
        evidence=evidence,
    )
    score = data["score"]
    metaphor = GeneratedMetaphor(
        triplet=triplet,
        template_id=data["template_id"],
        text=data["text"],
        comparison=data["comparison"],
        explanation=data.get("explanation"),
        id=data["id"],
    )
    candidate = ConnectingCandidate(
        target=data["target"],
        source=data["source"],
        word=data["connector"],
        pos=data["pos"],
        score=ScoreBreakdown(
            dist_target=float(score["dist_target"]),
            dist_source=float(score["dist_source"]),
            imbalance=float(score["imbalance"]),
            beta=float(score["beta"]),
            total=float(score["total"]),
        ),
    )
    return GeneratedRecord(metaphor=metaphor, candidate=candidate)


def write_records(path: Union[str, Path], records: Iterable[GeneratedRecord]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False, sort_keys=True) + "\n")
            n += 1
    return n


def read_records(path: Union[str, Path]) -> list[GeneratedRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}: bad metaphor record at line {lineno}: {exc}") from exc
    return records


def load_inventory(path: Union[str, Path]) -> list[GeneratedMetaphor]:
    """Metaphor inventory for the chat service, from a generate output file."""
    return [record.metaphor for record in read_records(path)]


def forms_for(metaphor: GeneratedMetaphor, mass_nouns: Optional[frozenset] = None):
    return expression_forms(metaphor, DEFAULT_MASS_NOUNS if mass_nouns is None else mass_nouns)
