"""Timestamp handling: all times are tz-aware UTC at millisecond precision."""

from __future__ import annotations

from datetime import datetime, timezone

ISO_MS = "milliseconds"


def utc_ms(dt: datetime) -> datetime:
    """Normalize a datetime to UTC, truncated to whole milliseconds.

    Naive datetimes are interpreted as UTC; aware ones are converted.
    """
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    else:
        dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def parse_ts(text: str) -> datetime:
    """Parse an ISO-8601 timestamp (with or without offset, 'Z' accepted)."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    return utc_ms(datetime.fromisoformat(raw))


def format_ts(dt: datetime) -> str:
    """Render as ISO-8601 UTC with millisecond precision."""
    return utc_ms(dt).isoformat(timespec=ISO_MS)


def epoch_ms(dt: datetime) -> int:
    return int(utc_ms(dt).timestamp() * 1000)
