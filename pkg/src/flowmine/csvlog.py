"""Flat CSV serialization of event logs (RFC-4180, UTF-8).

Fixed header ``case_id,event_id,activity,activity_id,activity_type,start,end,
resource`` followed by one ``attr:<name>`` column per dynamic attribute.
Attribute cells carry a one-letter type tag (``s:``/``i:``/``f:``/``b:``/``t:``)
so values round-trip with their types; an empty cell means the attribute is
absent for that event. The format has no log-level slot, so the process key
is supplied by the caller on import (the artifact store uses the file name).
"""

from __future__ import annotations

import csv
import io
from datetime import datetime
from typing import Union

from .eventlog import AttributeValue, Event, EventLog, LogError, build_log
from .timestamps import format_ts, parse_ts

HEADER = ["case_id", "event_id", "activity", "activity_id", "activity_type",
          "start", "end", "resource"]
ATTR_PREFIX = "attr:"


class CsvFormatError(LogError):
    pass


def _encode_attr(value: AttributeValue) -> str:
    if isinstance(value, bool):
        return "b:true" if value else "b:false"
    if isinstance(value, int):
        return f"i:{value}"
    if isinstance(value, float):
        return f"f:{value!r}"
    if isinstance(value, datetime):
        return f"t:{format_ts(value)}"
    return f"s:{value}"


def _decode_attr(cell: str, line: int, column: str) -> AttributeValue:
    if len(cell) < 2 or cell[1] != ":":
        raise CsvFormatError(f"line {line}, column {column!r}: missing type tag in {cell!r}")
    tag, raw = cell[0], cell[2:]
    try:
        if tag == "s":
            return raw
        if tag == "i":
            return int(raw)
        if tag == "f":
            return float(raw)
        if tag == "b":
            if raw not in ("true", "false"):
                raise ValueError(raw)
            return raw == "true"
        if tag == "t":
            return parse_ts(raw)
    except ValueError as exc:
        raise CsvFormatError(f"line {line}, column {column!r}: bad value {cell!r}") from exc
    raise CsvFormatError(f"line {line}, column {column!r}: unknown type tag in {cell!r}")


def export_csv(log: EventLog) -> bytes:
    attr_names = sorted({name for e in log.iter_events() for name in e.attributes})
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(HEADER + [ATTR_PREFIX + name for name in attr_names])
    for trace in log.traces:
        for event in trace.events:
            row = [
                trace.case_id,
                event.event_id,
                event.activity,
                event.activity_id,
                event.activity_type,
                format_ts(event.start),
                format_ts(event.end),
                event.resource or "",
            ]
            for name in attr_names:
                if name in event.attributes:
                    row.append(_encode_attr(event.attributes[name]))
                else:
                    row.append("")
            writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def import_csv(data: Union[bytes, str], process_key: str = "") -> EventLog:
    """Parse a CSV event log produced by :func:`export_csv`.

    Raises :class:`CsvFormatError` on header mismatch or unparseable cells,
    reporting the offending line and column.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty file: missing header") from None
    if header[: len(HEADER)] != HEADER:
        expect = ",".join(HEADER)
        raise CsvFormatError(f"header mismatch: expected it to start with {expect!r}")
    attr_names = []
    for extra in header[len(HEADER):]:
        if not extra.startswith(ATTR_PREFIX):
            raise CsvFormatError(f"unexpected column {extra!r} (attribute columns use {ATTR_PREFIX!r})")
        attr_names.append(extra[len(ATTR_PREFIX):])

    pairs: list[tuple[str, Event]] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"line {line_no}: expected {len(header)} cells, got {len(row)}")
        case_id, event_id, activity, activity_id, activity_type = row[:5]
        try:
            start = parse_ts(row[5])
        except ValueError as exc:
            raise CsvFormatError(f"line {line_no}, column 'start': bad timestamp {row[5]!r}") from exc
        try:
            end = parse_ts(row[6])
        except ValueError as exc:
            raise CsvFormatError(f"line {line_no}, column 'end': bad timestamp {row[6]!r}") from exc
        attributes: dict[str, AttributeValue] = {}
        for name, cell in zip(attr_names, row[len(HEADER):]):
            if cell:
                attributes[name] = _decode_attr(cell, line_no, ATTR_PREFIX + name)
        pairs.append((case_id, Event(
            event_id=event_id,
            activity=activity,
            activity_id=activity_id,
            activity_type=activity_type,
            start=start,
            end=end,
            resource=row[7] or None,
            attributes=attributes,
        )))
    return build_log(pairs, process_key)
