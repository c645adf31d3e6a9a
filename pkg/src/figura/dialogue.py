"""Metaphor triggering and the one-round / two-round / literal session protocol.

A session is a small state machine: Idle, or AwaitingFollowUp after a
two-round prompt was delivered. Trigger decisions score every inventory
metaphor against the incoming utterance with three transparent features
(keyword match, topic similarity, question-answer relevance) combined by
configurable weights; when a metaphor fires, its expression form is drawn
uniformly at random from the session's seeded generator. Follow-up
accounting replays the append-only event log.
"""
from __future__ import annotations

import random
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .embeddings import EmbeddingStore
from .errors import EventLogError, ProtocolError
from .events import DELIVERY, FOLLOWUP, MESSAGE, Event
from .generator import ExpressionForms, GeneratedMetaphor

FORM_LITERAL = "literal"
FORM_ONE_ROUND = "one_round"
FORM_TWO_ROUND = "two_round"
FORMS = (FORM_LITERAL, FORM_ONE_ROUND, FORM_TWO_ROUND)

DEFAULT_TRIGGER_WEIGHTS = (0.5, 0.4, 0.1)  # keyword, topic, question-answer
DEFAULT_FALLBACK_REPLY = "Tell me more."

_WORD_RE = re.compile(r"[a-z']+")
_INTERROGATIVES = frozenset(
    {"what", "who", "why", "how", "when", "where", "which", "whose",
     "can", "could", "would", "will", "do", "does", "did", "are", "is"}
)


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def is_directed_question(utterance: str) -> bool:
    """Heuristic: a question mark plus a bot-directed or interrogative opening."""
    if "?" not in utterance:
        return False
    words = tokenize(utterance)
    if not words:
        return False
    return "you" in words or "your" in words or words[0] in _INTERROGATIVES


@dataclass
class AwaitingFollowUp:
    """Pending two-round reveal; turns_waited stays within [0, follow_up_window]."""

    metaphor_id: str
    form: str
    turns_waited: int = 0


@dataclass
class Session:
    """Per-conversation dialogue state; one logical writer at a time."""

    id: str
    rng_seed: int
    state: Optional[AwaitingFollowUp] = None  # None = Idle
    transcript: list[tuple[str, str, float]] = field(default_factory=list)

    def __post_init__(self):
        self._rng = random.Random(self.rng_seed)

    @property
    def is_idle(self) -> bool:
        return self.state is None

    @property
    def state_name(self) -> str:
        return "idle" if self.is_idle else "awaiting_follow_up"

    def record(self, speaker: str, text: str, ts: Optional[float] = None) -> float:
        ts = time.time() if ts is None else ts
        if self.transcript and ts < self.transcript[-1][2]:
            ts = self.transcript[-1][2]
        self.transcript.append((speaker, text, ts))
        return ts

    def draw_form(self) -> str:
        return self._rng.choice(FORMS)


@dataclass(frozen=True)
class TriggerFeatures:
    keyword_match: bool
    topic_similarity: float
    qa_relevance: float


@dataclass(frozen=True)
class TriggerDecision:
    triggered: bool
    metaphor_id: Optional[str]
    form: Optional[str]
    relevance: float
    features: TriggerFeatures

    def __post_init__(self):
        if self.triggered and (self.metaphor_id is None or self.form is None):
            raise ValueError("a triggered decision must name a metaphor and a form")


def _topic_similarity(
    store: EmbeddingStore, content: Sequence[str], target: str
) -> float:
    if target not in store:
        return 0.0
    dists = [store.distance(w, target) for w in content if w in store]
    if not dists:
        return 0.0
    return min(max(1.0 - sum(dists) / len(dists), 0.0), 1.0)


def score_trigger(
    utterance: str,
    session: Session,
    inventory: Sequence[GeneratedMetaphor],
    store: EmbeddingStore,
    stopwords: Iterable[str],
    threshold: float = 0.5,
    weights: tuple[float, float, float] = DEFAULT_TRIGGER_WEIGHTS,
    neighbor_k: int = 5,
) -> TriggerDecision:
    """Decide whether (and with which metaphor and form) to respond figuratively.

    Per metaphor: keyword_match is true when the target lemma or one of its
    `neighbor_k` nearest neighbors occurs in the utterance; topic_similarity
    is one minus the mean distance of utterance content words to the target,
    clamped to [0, 1]; qa_relevance is 0 for questions directed at the bot
    and 1 otherwise. The best metaphor triggers iff its weighted relevance
    reaches the threshold and the session is Idle; the expression form is
    then drawn uniformly from the session's seeded generator.
    """
    if not inventory:
        raise ValueError("inventory must be nonempty")
    stop = {w.lower() for w in stopwords}
    words = tokenize(utterance)
    content = [w for w in words if w not in stop]
    qa = 0.0 if is_directed_question(utterance) else 1.0
    w_kw, w_topic, w_qa = weights

    best: Optional[tuple[float, GeneratedMetaphor, TriggerFeatures]] = None
    word_set = set(words)
    for metaphor in inventory:
        target = metaphor.triplet.target.lower()
        cues = {target}
        if target in store:
            cues.update(tok for tok, _ in store.nearest_neighbors(target, neighbor_k))
        keyword = bool(cues & word_set)
        topic = _topic_similarity(store, content, target)
        relevance = w_kw * keyword + w_topic * topic + w_qa * qa
        features = TriggerFeatures(keyword_match=keyword, topic_similarity=topic, qa_relevance=qa)
        if best is None or relevance > best[0]:
            best = (relevance, metaphor, features)

    relevance, metaphor, features = best
    if relevance >= threshold and session.is_idle:
        return TriggerDecision(
            triggered=True,
            metaphor_id=metaphor.id,
            form=session.draw_form(),
            relevance=relevance,
            features=features,
        )
    return TriggerDecision(
        triggered=False, metaphor_id=None, form=None, relevance=relevance, features=features
    )


def advance(
    session: Session,
    user_utterance: str,
    decision: TriggerDecision,
    forms: Optional[ExpressionForms],
    fallback_reply: str = DEFAULT_FALLBACK_REPLY,
    follow_up_window: int = 1,
    on_event: Optional[Callable[[Event], None]] = None,
    ts: Optional[float] = None,
) -> tuple[str, Optional[AwaitingFollowUp]]:
    """Run one dialogue turn; returns (bot reply, new session state).

    Idle with a triggered decision delivers the chosen form (two-round
    leaves the session awaiting the follow-up); Idle without a trigger
    echoes the fallback. A user utterance while awaiting within the window
    yields the reveal exactly once; past the window the session quietly
    returns to Idle. Events (message, delivery, followup) are emitted via
    `on_event` when given.
    """
    now = session.record("user", user_utterance, ts)

    def emit(kind: str, form: Optional[str] = None, metaphor_id: Optional[str] = None) -> None:
        if on_event is not None:
            on_event(Event(ts=now, session=session.id, kind=kind,
                           form=form, metaphor_id=metaphor_id))

    emit(MESSAGE)

    if session.state is not None:
        if decision.triggered:
            raise ProtocolError("trigger decision while awaiting a follow-up")
        pending = session.state
        if pending.turns_waited + 1 <= follow_up_window:
            if forms is None:
                raise ProtocolError("awaiting follow-up but no expression forms supplied")
            reply = forms.two_round[1]
            emit(FOLLOWUP, form=pending.form, metaphor_id=pending.metaphor_id)
            session.state = None
        else:
            session.state = None
            reply = fallback_reply
        session.record("bot", reply, now)
        return reply, session.state

    if not decision.triggered:
        session.record("bot", fallback_reply, now)
        return fallback_reply, session.state

    if forms is None:
        raise ProtocolError("triggered decision requires expression forms")
    if decision.form == FORM_LITERAL:
        reply = forms.literal
    elif decision.form == FORM_ONE_ROUND:
        reply = forms.one_round
    elif decision.form == FORM_TWO_ROUND:
        reply = forms.two_round[0]
        session.state = AwaitingFollowUp(
            metaphor_id=decision.metaphor_id, form=decision.form, turns_waited=0
        )
    else:
        raise ProtocolError(f"unknown expression form {decision.form!r}")
    emit(DELIVERY, form=decision.form, metaphor_id=decision.metaphor_id)
    session.record("bot", reply, now)
    return reply, session.state


def expire_follow_up(session: Session) -> None:
    """Close an awaited follow-up without a reveal (window lapsed externally)."""
    session.state = None


@dataclass
class FormStats:
    delivered: int = 0
    followed_up: int = 0

    @property
    def rate(self) -> float:
        return self.followed_up / self.delivered if self.delivered else 0.0


@dataclass
class FollowUpStats:
    """Per-form delivery and follow-up counts."""

    forms: dict[str, FormStats] = field(default_factory=lambda: {f: FormStats() for f in FORMS})

    def as_dict(self) -> dict:
        return {
            form: {
                "delivered": s.delivered,
                "followed_up": s.followed_up,
                "rate": s.rate,
            }
            for form, s in self.forms.items()
        }


def record_and_report(events: Iterable[Event], follow_up_window: int = 1) -> FollowUpStats:
    """Replay an event log into per-form follow-up statistics.

    A delivery is followed up when a user message arrives in the same
    session within `follow_up_window` subsequent messages, or when an
    explicit followup event confirms it; each delivery counts at most once.
    A followup event in a session that never saw a delivery is a data error
    naming the event.
    """
    stats = FollowUpStats()

    @dataclass
    class _Pending:
        form: str
        messages_seen: int = 0
        counted: bool = False

    pending: dict[str, _Pending] = {}
    delivered_sessions: set[str] = set()

    for event in events:
        if event.kind == DELIVERY:
            form = event.form or FORM_ONE_ROUND
            if form not in stats.forms:
                stats.forms[form] = FormStats()
            stats.forms[form].delivered += 1
            pending[event.session] = _Pending(form=form)
            delivered_sessions.add(event.session)
        elif event.kind == MESSAGE:
            p = pending.get(event.session)
            if p is None:
                continue
            p.messages_seen += 1
            if not p.counted and p.messages_seen <= follow_up_window:
                stats.forms[p.form].followed_up += 1
                p.counted = True
            if p.messages_seen >= follow_up_window:
                del pending[event.session]
        elif event.kind == FOLLOWUP:
            if event.session not in delivered_sessions:
                raise EventLogError(
                    f"follow-up without prior delivery in session {event.session!r} "
                    f"(ts={event.ts})"
                )
            p = pending.get(event.session)
            if p is not None and not p.counted:
                stats.forms[p.form].followed_up += 1
                p.counted = True
    return stats
