"""Append-only JSON-lines event log shared by the dialogue manager and service.

One event per line with fields {ts, session, kind, form, metaphor_id};
kind is one of delivery, followup, or message. The log is the single
source of truth for follow-up metrics and is replayed on demand.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import DataError

DELIVERY = "delivery"
FOLLOWUP = "followup"
MESSAGE = "message"
EVENT_KINDS = (DELIVERY, FOLLOWUP, MESSAGE)


@dataclass(frozen=True)
class Event:
    ts: float
    session: str
    kind: str
    form: Optional[str] = None
    metaphor_id: Optional[str] = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


def event_from_json(line: str) -> Event:
    data = json.loads(line)
    return Event(
        ts=float(data["ts"]),
        session=str(data["session"]),
        kind=str(data["kind"]),
        form=data.get("form"),
        metaphor_id=data.get("metaphor_id"),
    )


def append_events(path: Union[str, Path], events: Iterable[Event]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for event in events:
            fh.write(event.to_json() + "\n")


def read_events(path: Union[str, Path]) -> list[Event]:
    """Load an event log; a missing file is an empty log."""
    p = Path(path)
    if not p.exists():
        return []
    events = []
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(event_from_json(line))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}: bad event at line {lineno}: {exc}") from exc
    return events
