"""Trigger scoring, the session state machine, and follow-up accounting."""
from __future__ import annotations

import random
from collections import Counter

import pytest

from figura.dialogue import (
    FORM_LITERAL,
    FORM_ONE_ROUND,
    FORM_TWO_ROUND,
    FORMS,
    AwaitingFollowUp,
    Session,
    TriggerDecision,
    TriggerFeatures,
    advance,
    expire_follow_up,
    is_directed_question,
    record_and_report,
    score_trigger,
)
from figura.errors import EventLogError, ProtocolError
from figura.events import Event
from figura.generator import ExpressionForms
from figura.pipeline import forms_for

CHI2_CRITICAL_DF2_ALPHA01 = 9.21034


def _decision(form, metaphor_id="m1", triggered=True, relevance=0.9):
    return TriggerDecision(
        triggered=triggered,
        metaphor_id=metaphor_id if triggered else None,
        form=form if triggered else None,
        relevance=relevance,
        features=TriggerFeatures(keyword_match=True, topic_similarity=0.5, qa_relevance=1.0),
    )


BOWL_FORMS = ExpressionForms(
    literal="A child is innocent.",
    one_round="A child is like a bowl, innocent.",
    two_round=("A child is like a bowl. Do you know why?", "Innocent."),
)


def test_trigger_fires_on_target_mention(store, inventory, stopwords):
    session = Session(id="s", rng_seed=7)
    decision = score_trigger(
        "i think love is the best feeling", session, inventory, store, stopwords
    )
    assert decision.triggered
    assert decision.form in FORMS
    assert decision.features.keyword_match
    assert decision.relevance >= 0.5


def test_trigger_skips_unrelated_utterance(store, inventory, stopwords):
    session = Session(id="s", rng_seed=7)
    decision = score_trigger("the pizza delivery arrived", session, inventory, store, stopwords)
    assert not decision.triggered
    assert decision.form is None
    assert decision.relevance < 0.5


def test_trigger_suppressed_while_awaiting(store, inventory, stopwords):
    session = Session(id="s", rng_seed=7)
    session.state = AwaitingFollowUp(metaphor_id="m", form=FORM_TWO_ROUND)
    decision = score_trigger(
        "i think love is the best feeling", session, inventory, store, stopwords
    )
    assert not decision.triggered
    assert decision.relevance >= 0.5  # relevance was high; the state guard blocked it


def test_directed_question_heuristic():
    assert is_directed_question("What do you think about love?")
    assert is_directed_question("do you like me?")
    assert not is_directed_question("I love rainy days")
    assert not is_directed_question("love is strange?!")  # '?' but not aimed at the bot
    assert not is_directed_question("tell me about the sea")


def test_form_draws_are_uniform_within_bounds():
    session = Session(id="s", rng_seed=7)
    counts = Counter(session.draw_form() for _ in range(3000))
    for form in FORMS:
        assert 0.30 <= counts[form] / 3000 <= 0.37
    chi2 = sum((counts[f] - 1000.0) ** 2 / 1000.0 for f in FORMS)
    assert chi2 < CHI2_CRITICAL_DF2_ALPHA01


def test_determinism_under_seed(store, inventory, stopwords):
    def run(seed):
        session = Session(id="s", rng_seed=seed)
        out = []
        for text in ["love is great", "soul music tonight", "love again and again"]:
            decision = score_trigger(text, session, inventory, store, stopwords)
            forms = forms_for(next(m for m in inventory if m.id == decision.metaphor_id)) if decision.triggered else None
            reply, _ = advance(session, text, decision, forms, ts=1.0)
            out.append((decision.triggered, decision.form, reply))
            session.state = None  # keep idle so every turn can trigger
        return out

    assert run(11) == run(11)
    seqs = {tuple(run(seed)) for seed in range(6)}
    assert len(seqs) > 1  # different seeds change the drawn forms


def test_one_round_flow_keeps_idle():
    session = Session(id="s", rng_seed=1)
    reply, state = advance(session, "hello love", _decision(FORM_ONE_ROUND), BOWL_FORMS, ts=1.0)
    assert reply == BOWL_FORMS.one_round
    assert state is None and session.is_idle


def test_literal_flow_keeps_idle():
    session = Session(id="s", rng_seed=1)
    reply, state = advance(session, "hello", _decision(FORM_LITERAL), BOWL_FORMS, ts=1.0)
    assert reply == BOWL_FORMS.literal
    assert session.is_idle


def test_two_round_flow_reproduces_table_exchange():
    # scripted two-round exchange: prompt, user guess, reveal
    session = Session(id="s", rng_seed=1)
    reply, state = advance(session, "I am so cute", _decision(FORM_TWO_ROUND), BOWL_FORMS, ts=1.0)
    assert reply == "A child is like a bowl. Do you know why?"
    assert isinstance(state, AwaitingFollowUp)

    not_triggered = _decision(None, triggered=False)
    reply2, state2 = advance(session, "Because you are fragile.", not_triggered, BOWL_FORMS, ts=2.0)
    assert reply2 == "Innocent."
    assert state2 is None and session.is_idle


def test_window_exhausted_returns_idle_without_reveal():
    session = Session(id="s", rng_seed=1)
    advance(session, "hi", _decision(FORM_TWO_ROUND), BOWL_FORMS, ts=1.0)
    not_triggered = _decision(None, triggered=False)
    reply, state = advance(
        session, "anyway", not_triggered, BOWL_FORMS, follow_up_window=0, fallback_reply="Ok.", ts=2.0
    )
    assert reply == "Ok."
    assert state is None


def test_expire_follow_up():
    session = Session(id="s", rng_seed=1)
    advance(session, "hi", _decision(FORM_TWO_ROUND), BOWL_FORMS, ts=1.0)
    expire_follow_up(session)
    assert session.is_idle


def test_protocol_errors():
    session = Session(id="s", rng_seed=1)
    session.state = AwaitingFollowUp(metaphor_id="m", form=FORM_TWO_ROUND)
    with pytest.raises(ProtocolError):
        advance(session, "hi", _decision(FORM_ONE_ROUND), BOWL_FORMS, ts=1.0)
    idle = Session(id="s2", rng_seed=1)
    with pytest.raises(ProtocolError):
        advance(idle, "hi", _decision(FORM_ONE_ROUND), None, ts=1.0)


def test_scripted_six_turn_session_hand_trace():
    # hand-traced table of (utterance, decision, expected reply, expected state)
    session = Session(id="s", rng_seed=3)
    not_triggered = _decision(None, triggered=False)
    script = [
        ("hi there", not_triggered, "Tell me more.", "idle"),
        ("i love mornings", _decision(FORM_ONE_ROUND), BOWL_FORMS.one_round, "idle"),
        ("tell me something", not_triggered, "Tell me more.", "idle"),
        ("my child is funny", _decision(FORM_TWO_ROUND), BOWL_FORMS.two_round[0], "awaiting_follow_up"),
        ("why is that?", not_triggered, BOWL_FORMS.two_round[1], "idle"),
        ("good night", not_triggered, "Tell me more.", "idle"),
    ]
    for i, (text, decision, expected_reply, expected_state) in enumerate(script):
        reply, _ = advance(session, text, decision, BOWL_FORMS, ts=float(i))
        assert reply == expected_reply
        assert session.state_name == expected_state
    speakers = [speaker for speaker, _, _ in session.transcript]
    assert speakers == ["user", "bot"] * 6
    times = [ts for _, _, ts in session.transcript]
    assert times == sorted(times)


def test_randomized_sessions_never_violate_reveal_invariants():
    rng = random.Random(2024)
    for trial in range(200):
        session = Session(id=f"s{trial}", rng_seed=trial)
        reveals_since_delivery = 0
        pending = False
        for turn in range(rng.randint(1, 12)):
            if session.is_idle and rng.random() < 0.5:
                decision = _decision(rng.choice(FORMS))
            else:
                decision = _decision(None, triggered=False)
            was_idle = session.is_idle
            reply, _ = advance(session, f"turn {turn}", decision, BOWL_FORMS, ts=float(turn))
            if reply == BOWL_FORMS.two_round[1]:
                # reveal only ever emitted from AwaitingFollowUp, at most once
                assert not was_idle
                assert pending
                reveals_since_delivery += 1
                assert reveals_since_delivery == 1
                pending = False
            if reply == BOWL_FORMS.two_round[0]:
                pending = True
                reveals_since_delivery = 0


# ---------------------------------------------------------------------------
# Follow-up accounting
# ---------------------------------------------------------------------------


def synthetic_event_log() -> list[Event]:
    """100 deliveries per form with 22 / 27 / 41 followed-up sessions."""
    events = []
    ts = 0.0
    for form, follow_ups in ((FORM_LITERAL, 22), (FORM_ONE_ROUND, 27), (FORM_TWO_ROUND, 41)):
        for i in range(100):
            sid = f"{form}-{i}"
            ts += 1.0
            events.append(Event(ts=ts, session=sid, kind="delivery", form=form, metaphor_id="m1"))
            if i < follow_ups:
                ts += 1.0
                events.append(Event(ts=ts, session=sid, kind="message"))
    return events


def test_synthetic_log_reproduces_reported_rates():
    stats = record_and_report(synthetic_event_log())
    assert stats.forms[FORM_LITERAL].rate == pytest.approx(0.22)
    assert stats.forms[FORM_ONE_ROUND].rate == pytest.approx(0.27)
    assert stats.forms[FORM_TWO_ROUND].rate == pytest.approx(0.41)
    assert all(stats.forms[f].delivered == 100 for f in FORMS)


def test_empty_log_is_all_zero():
    stats = record_and_report([])
    for form in FORMS:
        assert stats.forms[form].delivered == 0
        assert stats.forms[form].followed_up == 0
        assert stats.forms[form].rate == 0.0


def test_hand_written_twelve_event_log():
    E = Event
    events = [
        E(ts=1, session="a", kind="message"),
        E(ts=2, session="a", kind="delivery", form="literal", metaphor_id="m"),
        E(ts=3, session="a", kind="message"),                       # follow-up (literal)
        E(ts=4, session="b", kind="delivery", form="two_round", metaphor_id="m"),
        E(ts=5, session="b", kind="message"),                       # follow-up (two_round)
        E(ts=6, session="b", kind="followup", form="two_round", metaphor_id="m"),  # reveal marker
        E(ts=7, session="c", kind="delivery", form="one_round", metaphor_id="m"),
        E(ts=8, session="d", kind="delivery", form="one_round", metaphor_id="m"),
        E(ts=9, session="d", kind="message"),                       # follow-up (one_round)
        E(ts=10, session="c", kind="delivery", form="literal", metaphor_id="m"),
        E(ts=11, session="c", kind="message"),                      # follow-up (literal)
        E(ts=12, session="d", kind="message"),                      # beyond window, ignored
    ]
    stats = record_and_report(events)
    # hand tally: literal 2 delivered / 2 followed; one_round 2 / 1; two_round 1 / 1
    assert (stats.forms["literal"].delivered, stats.forms["literal"].followed_up) == (2, 2)
    assert (stats.forms["one_round"].delivered, stats.forms["one_round"].followed_up) == (2, 1)
    assert (stats.forms["two_round"].delivered, stats.forms["two_round"].followed_up) == (1, 1)


def test_dangling_follow_up_is_a_data_error():
    events = [Event(ts=1, session="x", kind="followup", form="two_round", metaphor_id="m")]
    with pytest.raises(EventLogError, match="x"):
        record_and_report(events)


def test_stats_conservation_over_prefixes():
    events = synthetic_event_log()
    deliveries_seen = Counter()
    for cut in range(0, len(events) + 1, 37):
        stats = record_and_report(events[:cut])
        total_delivered = sum(s.delivered for s in stats.forms.values())
        assert total_delivered == sum(1 for e in events[:cut] if e.kind == "delivery")
        for form in FORMS:
            assert stats.forms[form].followed_up <= stats.forms[form].delivered


def test_advance_emits_events_consumed_by_stats(inventory):
    m = inventory[0]
    forms = forms_for(m)
    session = Session(id="s", rng_seed=5)
    collected: list[Event] = []
    advance(session, "hello", _decision(FORM_TWO_ROUND, metaphor_id=m.id), forms,
            on_event=collected.append, ts=1.0)
    advance(session, "why?", _decision(None, triggered=False), forms,
            on_event=collected.append, ts=2.0)
    kinds = [e.kind for e in collected]
    assert kinds == ["message", "delivery", "message", "followup"]
    stats = record_and_report(collected)
    assert stats.forms[FORM_TWO_ROUND].delivered == 1
    assert stats.forms[FORM_TWO_ROUND].followed_up == 1
