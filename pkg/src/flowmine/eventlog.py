"""Core event-log model: interval events grouped into traces, one log per process key."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Iterator, Union

AttributeValue = Union[str, int, float, bool, datetime]


class LogError(Exception):
    """Base class for event-log construction and serialization errors."""


class DuplicateEventIdError(LogError):
    def __init__(self, event_id: str):
        self.event_id = event_id
        super().__init__(f"duplicate event_id: {event_id!r}")


class InvalidEventError(LogError):
    pass


@dataclass(frozen=True)
class Event:
    """One activity-instance interval.

    ``start`` and ``end`` must be tz-aware UTC datetimes at millisecond
    precision (see :mod:`flowmine.timestamps`); builders are responsible
    for normalizing before construction.
    """

    event_id: str
    activity: str
    activity_id: str
    activity_type: str
    start: datetime
    end: datetime
    resource: str | None = None
    attributes: dict[str, AttributeValue] = field(default_factory=dict)

    @property
    def sort_key(self) -> tuple[datetime, datetime, str]:
        return (self.start, self.end, self.event_id)

    @property
    def duration_seconds(self) -> float:
        return (self.end - self.start).total_seconds()


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple[Event, ...]

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)


@dataclass(frozen=True)
class EventLog:
    process_key: str
    traces: tuple[Trace, ...]

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    @property
    def n_events(self) -> int:
        return sum(len(t) for t in self.traces)

    def iter_events(self) -> Iterator[Event]:
        for trace in self.traces:
            yield from trace.events

    def activity_sequences(self) -> list[tuple[str, ...]]:
        return [tuple(e.activity for e in t) for t in self.traces]


def _validate_event(event: Event) -> None:
    if not event.event_id:
        raise InvalidEventError("event_id must be nonempty")
    if not event.activity:
        raise InvalidEventError(f"event {event.event_id!r}: activity must be nonempty")
    if event.start > event.end:
        raise InvalidEventError(f"event {event.event_id!r}: start after end")


def build_log(events: Iterable[tuple[str, Event]], process_key: str) -> EventLog:
    """Group (case_id, event) pairs into a log.

    Traces appear in order of first occurrence of their case id; events
    within a trace are sorted by (start, end, event_id). Empty input
    yields an empty log. Raises :class:`DuplicateEventIdError` when the
    same event_id occurs twice and :class:`InvalidEventError` on events
    violating the field invariants.
    """
    by_case: dict[str, list[Event]] = {}
    seen_ids: set[str] = set()
    for case_id, event in events:
        if not case_id:
            raise InvalidEventError(f"event {event.event_id!r}: case_id must be nonempty")
        _validate_event(event)
        if event.event_id in seen_ids:
            raise DuplicateEventIdError(event.event_id)
        seen_ids.add(event.event_id)
        by_case.setdefault(case_id, []).append(event)
    traces = tuple(
        Trace(case_id=cid, events=tuple(sorted(evs, key=lambda e: e.sort_key)))
        for cid, evs in by_case.items()
    )
    return EventLog(process_key=process_key, traces=traces)


def filter_activity_types(log: EventLog, keep: set[str]) -> EventLog:
    """Keep only events whose activity_type is in ``keep``; drop emptied traces."""
    traces = []
    for trace in log.traces:
        kept = tuple(e for e in trace.events if e.activity_type in keep)
        if kept:
            traces.append(Trace(case_id=trace.case_id, events=kept))
    return EventLog(process_key=log.process_key, traces=tuple(traces))


def merge_logs(base: EventLog, delta: EventLog) -> EventLog:
    """Union two logs of the same process (cases may gain events over time)."""
    pairs = [(t.case_id, e) for t in base.traces for e in t.events]
    pairs += [(t.case_id, e) for t in delta.traces for e in t.events]
    return build_log(pairs, base.process_key or delta.process_key)
