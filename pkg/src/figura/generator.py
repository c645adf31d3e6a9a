"""Render validated triplets into metaphor sentences and expression forms.

Adjective connectors use fixed sentence templates ("T is as ADJ as V.");
verb and noun connectors become "T is like V, <explanation>." sentences
whose explanation clause is lifted from the corpus evidence sentence by
dropping the subject from the predicate subtree. Every metaphor can then
be expanded into three expression forms: the literal baseline, the
one-round metaphor, and the two-round prompt/reveal pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Union

from .evidence import (
    DEFAULT_RELATIONS,
    SUBJECT_VERB,
    EvidenceSentence,
    ParsedSentence,
    RelationConfig,
)

TEMPLATE_PLACEHOLDERS = ("{T}", "{V}", "{ADJ}", "{CLAUSE}", "{ART}")

DEFAULT_TEMPLATES: dict[str, str] = {
    "just_like": "{T} is {ADJ}, just like {ART}{V}.",
    "as_as": "{T} is as {ADJ} as {ART}{V}.",
    "like_a": "{T} is like {ART}{ADJ} {V}.",
}

EXPLANATION_TEMPLATE_ID = "is_like_because"

# Nouns rendered without an indefinite article ("love is like salary").
DEFAULT_MASS_NOUNS = frozenset(
    {
        "math",
        "salary",
        "money",
        "sugar",
        "water",
        "music",
        "food",
        "beef",
        "chicken",
        "rice",
        "snow",
        "sand",
        "tea",
        "coffee",
        "homework",
        "clothes",
        "photos",
        "news",
    }
)

_VOWELS = "aeiou"


@dataclass(frozen=True)
class MetaphorTriplet:
    """A validated (target, source, connector) triplet with its evidence."""

    target: str
    source: str
    connector: str
    pos: str
    evidence: Optional[EvidenceSentence] = None

    def __post_init__(self):
        if self.pos not in ("adjective", "verb", "noun"):
            raise ValueError(f"invalid triplet POS {self.pos!r}")
        if self.pos == "adjective" and self.evidence is not None:
            raise ValueError("adjective triplets carry no evidence sentence")
        if self.pos != "adjective" and self.evidence is None:
            raise ValueError(f"{self.pos} triplets require an evidence sentence")


@dataclass(frozen=True)
class GeneratedMetaphor:
    """A rendered metaphor sentence plus its comparison clause and explanation."""

    triplet: MetaphorTriplet
    template_id: str
    text: str
    comparison: str
    explanation: Optional[str] = None
    id: str = ""

    def __post_init__(self):
        if not self.id:
            t = self.triplet
            object.__setattr__(
                self, "id", f"{t.target}:{t.source}:{t.connector}:{self.template_id}"
            )


@dataclass(frozen=True)
class ExpressionForms:
    """The three deployment forms of one metaphor."""

    literal: str
    one_round: str
    two_round: tuple[str, str]  # (prompt, reveal)


def article(noun: str, next_word: str, mass_nouns: frozenset = DEFAULT_MASS_NOUNS) -> str:
    """Indefinite article (with trailing space) for a noun phrase, or '' for mass nouns.

    `next_word` is the first word of the phrase the article precedes (the
    adjective in "an empty station", the noun itself otherwise); it decides
    a vs. an, while membership of `noun` in the mass-noun list suppresses
    the article entirely.
    """
    if noun.lower() in mass_nouns:
        return ""
    return "an " if next_word[:1].lower() in _VOWELS else "a "


def _capitalize(text: str) -> str:
    return text[:1].upper() + text[1:] if text else text


def comparison_clause(
    target: str, source: str, mass_nouns: frozenset = DEFAULT_MASS_NOUNS
) -> str:
    """The bare "T is like (a|an|.) V" clause, lowercase, no terminal punctuation."""
    return f"{target} is like {article(source, source, mass_nouns)}{source}"


def load_templates(path: Union[str, Path]) -> dict[str, str]:
    """Read a template file: ``identifier<TAB>pattern`` lines, '#' comments."""
    templates: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}: expected 'id<TAB>pattern' at line {lineno}")
            ident, pattern = line.split("\t", 1)
            templates[ident.strip()] = pattern
    return templates


def render_adjective(
    triplet: MetaphorTriplet,
    template_id: str,
    templates: Optional[Mapping[str, str]] = None,
    mass_nouns: frozenset = DEFAULT_MASS_NOUNS,
) -> GeneratedMetaphor:
    """Render an adjective triplet with one of the sentence templates.

    The article slot is filled by the article rule: a/an by the first word
    following the article, nothing for mass nouns. The output sentence is
    capitalized at its first character only.
    """
    if triplet.pos != "adjective":
        raise ValueError(f"render_adjective needs an adjective triplet, got {triplet.pos}")
    table = dict(DEFAULT_TEMPLATES)
    if templates:
        table.update(templates)
    if template_id not in table:
        raise ValueError(f"unknown template id {template_id!r}")
    pattern = table[template_id]
    # In "like_a" the article precedes the adjective, so a/an follows its sound.
    art_next = triplet.connector if "{ART}{ADJ}" in pattern else triplet.source
    text = pattern.format(
        T=triplet.target,
        V=triplet.source,
        ADJ=triplet.connector,
        ART=article(triplet.source, art_next, mass_nouns),
        CLAUSE="",
    )
    return GeneratedMetaphor(
        triplet=triplet,
        template_id=template_id,
        text=_capitalize(text),
        comparison=comparison_clause(triplet.target, triplet.source, mass_nouns),
        explanation=None,
    )


def _join_forms(tokens: list) -> str:
    """Join token forms with spaces, attaching punctuation to the previous token."""
    parts: list[str] = []
    for tok in tokens:
        if tok.upos == "PUNCT" and parts:
            parts[-1] += tok.form
        else:
            parts.append(tok.form)
    return " ".join(parts)


def extract_explanation_clause(
    evidence: EvidenceSentence,
    connector: str,
    relations: RelationConfig = DEFAULT_RELATIONS,
) -> str:
    """Lift the predicate clause from an evidence sentence, dropping the subject.

    The predicate is the verb of which the matched keyword (the target or
    source mention) is the subject, preferring the connector verb itself
    when several qualify. The clause is that verb's subtree minus the
    subject's subtree, joined in sentence order with trailing punctuation
    stripped; it must still contain the connector lemma.
    """
    sent = evidence.sentence
    conn = connector.lower()
    anchor = evidence.matched_keyword.lower()

    candidates: list[tuple[int, int]] = []  # (predicate id, subject id)
    for i, tok in enumerate(sent.tokens, start=1):
        if tok.upos != "VERB":
            continue
        for j, child in enumerate(sent.tokens, start=1):
            if child.head == i and child.key() == anchor and child.base_deprel() in relations.subject:
                candidates.append((i, j))
                break
    if not candidates:
        raise ValueError(
            f"evidence sentence {sent.id} has no predicate with subject {anchor!r}"
        )
    preferred = [c for c in candidates if sent.tokens[c[0] - 1].key() == conn]
    predicate_id, subject_id = (preferred or candidates)[0]

    keep = set(sent.subtree(predicate_id)) - set(sent.subtree(subject_id))
    clause_tokens = [sent.tokens[i - 1] for i in sorted(keep)]
    while clause_tokens and clause_tokens[-1].upos == "PUNCT":
        clause_tokens.pop()
    clause = _join_forms(clause_tokens).strip().rstrip(".,;:!?")
    if conn not in {t.key() for t in clause_tokens}:
        raise ValueError(f"extracted clause lacks the connector lemma {connector!r}")
    return clause


def render_with_explanation(
    triplet: MetaphorTriplet,
    mass_nouns: frozenset = DEFAULT_MASS_NOUNS,
    relations: RelationConfig = DEFAULT_RELATIONS,
) -> GeneratedMetaphor:
    """Render a verb or noun triplet as "T is like V, <explanation>."."""
    if triplet.pos == "adjective":
        raise ValueError("render_with_explanation needs a verb or noun triplet")
    if triplet.evidence is None:
        raise ValueError("verb/noun rendering requires an evidence sentence")
    clause = extract_explanation_clause(triplet.evidence, triplet.connector, relations)
    comparison = comparison_clause(triplet.target, triplet.source, mass_nouns)
    text = _capitalize(f"{comparison}, {clause}.")
    return GeneratedMetaphor(
        triplet=triplet,
        template_id=EXPLANATION_TEMPLATE_ID,
        text=text,
        comparison=comparison,
        explanation=clause,
    )


def expression_forms(
    m: GeneratedMetaphor, mass_nouns: frozenset = DEFAULT_MASS_NOUNS
) -> ExpressionForms:
    """Expand a metaphor into its literal, one-round, and two-round forms.

    The literal baseline applies the connector to the target alone
    ("Heart is shining."). The two-round prompt states the comparison and
    asks why, never revealing the connector; the reveal carries the
    explanation, or "Because both are ADJ." for adjective metaphors.
    """
    t = m.triplet
    if m.explanation is not None:
        literal = _capitalize(f"{t.target} {m.explanation}.")
        reveal = _capitalize(f"{m.explanation}.")
    else:
        literal = _capitalize(f"{t.target} is {t.connector}.")
        reveal = f"Because both are {t.connector}."
    prompt = f"I heard that {m.comparison}. Do you know why?"
    return ExpressionForms(literal=literal, one_round=m.text, two_round=(prompt, reveal))
