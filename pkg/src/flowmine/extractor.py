"""Extraction of event logs from engine history tables.

The activity-instance history table supplies one row per executed flow node;
rows without an end time are ongoing executions and are skipped. A second
detail table contributes typed event attributes. Extraction is incremental:
a persisted watermark (highest seen end time plus the row ids at exactly
that time) lets repeated runs emit each completed row exactly once, even
when many rows share the same completion millisecond.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import sqlite3
import tempfile
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Protocol, Sequence, Union

from .eventlog import Event, EventLog, build_log
from .timestamps import format_ts, parse_ts

log = logging.getLogger(__name__)

ACTINST_COLUMNS = ["id_", "proc_def_key_", "proc_inst_id_", "act_id_", "act_name_",
                   "act_type_", "start_time_", "end_time_", "assignee_"]
DETAIL_COLUMNS = ["act_inst_id_", "name_", "var_type_", "text_", "long_", "double_", "time_"]

ACTINST_TABLE = "ACT_HI_ACTINST"
DETAIL_TABLE = "ACT_HI_DETAIL"


class ExtractionError(Exception):
    pass


class TableFormatError(ExtractionError):
    pass


class SourceUnreachableError(ExtractionError):
    pass


class StateCorruptError(ExtractionError):
    pass


@dataclass(frozen=True)
class ActInstRow:
    id_: str
    proc_def_key_: str
    proc_inst_id_: str
    act_id_: str
    act_name_: str
    act_type_: str
    start_time_: datetime
    end_time_: datetime | None
    assignee_: str | None


@dataclass(frozen=True)
class DetailRow:
    act_inst_id_: str
    name_: str
    var_type_: str
    text_: str | None = None
    long_: int | None = None
    double_: float | None = None
    time_: datetime | None = None


def read_table_csv(data: Union[bytes, str], kind: str) -> list:
    """Read a history-table CSV fixture (``kind`` is ``actinst`` or ``detail``).

    The header must name exactly the documented columns; empty cells map to
    absent optionals. Bad timestamps and missing columns raise
    :class:`TableFormatError` with the offending line/column.
    """
    if kind == "actinst":
        columns = ACTINST_COLUMNS
    elif kind == "detail":
        columns = DETAIL_COLUMNS
    else:
        raise ValueError(f"unknown table kind {kind!r}")
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise TableFormatError("empty file: missing header") from None
    missing = [c for c in columns if c not in header]
    if missing:
        raise TableFormatError(f"missing column(s): {', '.join(missing)}")
    extra = [c for c in header if c not in columns]
    if extra:
        raise TableFormatError(f"unknown column(s): {', '.join(extra)}")
    index = {c: header.index(c) for c in columns}

    def cell(row: list[str], name: str) -> str | None:
        value = row[index[name]]
        return value if value != "" else None

    def ts(row: list[str], name: str, line: int) -> datetime | None:
        raw = cell(row, name)
        if raw is None:
            return None
        try:
            return parse_ts(raw)
        except ValueError as exc:
            raise TableFormatError(f"line {line}, column {name!r}: bad timestamp {raw!r}") from exc

    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise TableFormatError(f"line {line_no}: expected {len(header)} cells, got {len(row)}")
        if kind == "actinst":
            start = ts(row, "start_time_", line_no)
            if start is None:
                raise TableFormatError(f"line {line_no}, column 'start_time_': value required")
            rows.append(ActInstRow(
                id_=cell(row, "id_") or "",
                proc_def_key_=cell(row, "proc_def_key_") or "",
                proc_inst_id_=cell(row, "proc_inst_id_") or "",
                act_id_=cell(row, "act_id_") or "",
                act_name_=cell(row, "act_name_") or "",
                act_type_=cell(row, "act_type_") or "",
                start_time_=start,
                end_time_=ts(row, "end_time_", line_no),
                assignee_=cell(row, "assignee_"),
            ))
        else:
            raw_long = cell(row, "long_")
            raw_double = cell(row, "double_")
            try:
                long_ = int(raw_long) if raw_long is not None else None
                double_ = float(raw_double) if raw_double is not None else None
            except ValueError as exc:
                raise TableFormatError(f"line {line_no}: bad numeric value") from exc
            rows.append(DetailRow(
                act_inst_id_=cell(row, "act_inst_id_") or "",
                name_=cell(row, "name_") or "",
                var_type_=cell(row, "var_type_") or "",
                text_=cell(row, "text_"),
                long_=long_,
                double_=double_,
                time_=ts(row, "time_", line_no),
            ))
    return rows


@dataclass
class ParseResult:
    events_by_key: dict[str, list[tuple[str, Event]]]
    skipped_incomplete: int = 0
    rejected_duplicates: int = 0
    dropped_details: int = 0

    @property
    def n_events(self) -> int:
        return sum(len(v) for v in self.events_by_key.values())


def parse_actinst_rows(rows: Sequence[ActInstRow]) -> ParseResult:
    """Map activity-instance rows to events, split by process-definition key.

    Rows without an end time (ongoing executions) are skipped and counted;
    rows repeating an already-seen id are rejected and counted, keeping the
    first occurrence. Events with an empty element name fall back to the
    element id so that activities are always nonempty.
    """
    result = ParseResult(events_by_key={})
    seen: set[str] = set()
    for row in rows:
        if row.id_ in seen:
            result.rejected_duplicates += 1
            log.warning("duplicate actinst id %r rejected", row.id_)
            continue
        seen.add(row.id_)
        if row.end_time_ is None:
            result.skipped_incomplete += 1
            continue
        event = Event(
            event_id=row.id_,
            activity=row.act_name_ or row.act_id_,
            activity_id=row.act_id_,
            activity_type=row.act_type_,
            start=row.start_time_,
            end=row.end_time_,
            resource=row.assignee_,
        )
        result.events_by_key.setdefault(row.proc_def_key_, []).append((row.proc_inst_id_, event))
    return result


def _detail_value(row: DetailRow):
    kind = row.var_type_.lower()
    if kind in ("long", "integer", "int", "short"):
        return row.long_
    if kind == "double":
        return row.double_
    if kind == "date":
        return row.time_
    if kind in ("boolean", "bool"):
        if row.text_ is None:
            return None
        return row.text_.strip().lower() == "true"
    return row.text_


def merge_detail_attributes(parsed: ParseResult, details: Sequence[DetailRow]) -> ParseResult:
    """Attach detail-table values as typed event attributes (last write wins).

    Detail rows whose activity-instance id matches no parsed event are
    dropped with a warning and counted in ``dropped_details``.
    """
    index: dict[str, tuple[str, int]] = {}
    for key, pairs in parsed.events_by_key.items():
        for i, (_case, event) in enumerate(pairs):
            index[event.event_id] = (key, i)
    extra: dict[str, dict[str, object]] = {}
    dropped = 0
    for row in details:
        if row.act_inst_id_ not in index:
            dropped += 1
            continue
        value = _detail_value(row)
        if value is None:
            continue
        extra.setdefault(row.act_inst_id_, {})[row.name_] = value
    if dropped:
        log.warning("%d detail row(s) referenced no extracted event", dropped)
    for event_id, attrs in extra.items():
        key, i = index[event_id]
        case_id, event = parsed.events_by_key[key][i]
        merged = dict(event.attributes)
        merged.update(attrs)
        parsed.events_by_key[key][i] = (case_id, replace(event, attributes=merged))
    parsed.dropped_details += dropped
    return parsed


@dataclass(frozen=True)
class Watermark:
    high_time: datetime
    ids: frozenset[str]


@dataclass
class WatermarkState:
    """Per-process-key extraction cursor."""

    marks: dict[str, Watermark] = field(default_factory=dict)

    VERSION = 1

    def covers(self, key: str, end_time: datetime, row_id: str) -> bool:
        mark = self.marks.get(key)
        if mark is None:
            return False
        if end_time < mark.high_time:
            return True
        if end_time == mark.high_time:
            return row_id in mark.ids
        return False

    def min_high_time(self) -> datetime | None:
        if not self.marks:
            return None
        return min(m.high_time for m in self.marks.values())

    def advanced(self, key: str, rows: Sequence[tuple[datetime, str]]) -> "WatermarkState":
        """Return a copy whose mark for ``key`` also covers the given (end, id) rows."""
        if not rows:
            return self
        high = max(end for end, _ in rows)
        old = self.marks.get(key)
        if old is not None and old.high_time > high:
            return self
        ids = {rid for end, rid in rows if end == high}
        if old is not None and old.high_time == high:
            ids |= old.ids
        marks = dict(self.marks)
        marks[key] = Watermark(high_time=high, ids=frozenset(ids))
        return WatermarkState(marks=marks)

    def to_json(self) -> dict:
        return {
            "version": self.VERSION,
            "watermarks": {
                key: {"high_time": format_ts(m.high_time), "ids": sorted(m.ids)}
                for key, m in sorted(self.marks.items())
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "WatermarkState":
        try:
            if doc.get("version") != cls.VERSION:
                raise StateCorruptError(f"unsupported state version: {doc.get('version')!r}")
            marks = {}
            for key, entry in doc.get("watermarks", {}).items():
                marks[key] = Watermark(
                    high_time=parse_ts(entry["high_time"]),
                    ids=frozenset(entry["ids"]),
                )
            return cls(marks=marks)
        except StateCorruptError:
            raise
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise StateCorruptError(f"malformed watermark state: {exc}") from exc

    @classmethod
    def load(cls, path: Union[str, Path]) -> "WatermarkState":
        path = Path(path)
        if not path.exists():
            return cls()
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StateCorruptError(f"cannot read watermark state {path}: {exc}") from exc
        return cls.from_json(doc)

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(self.to_json(), fh, indent=2)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


class TabularSource(Protocol):
    """Read access to the two history tables."""

    def actinst_rows(self, min_end_time: datetime | None) -> list[ActInstRow]:
        """All rows, or (as an optimization) at least those with end_time_ >= bound or no end."""
        ...

    def detail_rows(self, act_inst_ids: set[str]) -> list[DetailRow]:
        ...


class ListSource:
    """In-memory source, mainly for tests and programmatic use."""

    def __init__(self, actinst: Iterable[ActInstRow], details: Iterable[DetailRow] = ()):
        self._actinst = list(actinst)
        self._details = list(details)

    def actinst_rows(self, min_end_time: datetime | None) -> list[ActInstRow]:
        return list(self._actinst)

    def detail_rows(self, act_inst_ids: set[str]) -> list[DetailRow]:
        return [d for d in self._details if d.act_inst_id_ in act_inst_ids]


class CsvDirectorySource:
    """Fixture source: ``actinst.csv`` (required) and ``detail.csv`` (optional)."""

    ACTINST_FILE = "actinst.csv"
    DETAIL_FILE = "detail.csv"

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def actinst_rows(self, min_end_time: datetime | None) -> list[ActInstRow]:
        path = self.directory / self.ACTINST_FILE
        if not path.is_file():
            raise SourceUnreachableError(f"missing {path}")
        return read_table_csv(path.read_bytes(), "actinst")

    def detail_rows(self, act_inst_ids: set[str]) -> list[DetailRow]:
        path = self.directory / self.DETAIL_FILE
        if not path.is_file():
            return []
        rows = read_table_csv(path.read_bytes(), "detail")
        return [d for d in rows if d.act_inst_id_ in act_inst_ids]


class SqlSource:
    """Relational source over a DB-API connection with named-parameter support.

    Issues ``SELECT <columns> FROM ACT_HI_ACTINST WHERE end_time_ >= :wm``
    (plus the ongoing rows) and ``SELECT <columns> FROM ACT_HI_DETAIL WHERE
    act_inst_id_ IN (...)``. Timestamps may come back as ISO strings or
    datetimes depending on the driver.
    """

    IN_CHUNK = 400

    def __init__(self, connection):
        self.connection = connection

    @staticmethod
    def _ts(value) -> datetime | None:
        if value is None:
            return None
        if isinstance(value, datetime):
            from .timestamps import utc_ms
            return utc_ms(value)
        return parse_ts(str(value))

    def _execute(self, sql: str, params=None):
        try:
            cur = self.connection.cursor()
            cur.execute(sql, params or {})
            return cur.fetchall()
        except sqlite3.Error as exc:
            raise SourceUnreachableError(f"query failed: {exc}") from exc

    def actinst_rows(self, min_end_time: datetime | None) -> list[ActInstRow]:
        cols = ", ".join(ACTINST_COLUMNS)
        if min_end_time is None:
            raws = self._execute(f"SELECT {cols} FROM {ACTINST_TABLE}")
        else:
            raws = self._execute(
                f"SELECT {cols} FROM {ACTINST_TABLE} WHERE end_time_ >= :wm OR end_time_ IS NULL",
                {"wm": format_ts(min_end_time)},
            )
        rows = []
        for raw in raws:
            (id_, key, inst, act_id, act_name, act_type, start, end, assignee) = raw
            start_ts = self._ts(start)
            if start_ts is None:
                raise TableFormatError(f"row {id_!r}: start_time_ required")
            rows.append(ActInstRow(
                id_=str(id_), proc_def_key_=str(key), proc_inst_id_=str(inst),
                act_id_=str(act_id or ""), act_name_=str(act_name or ""),
                act_type_=str(act_type or ""),
                start_time_=start_ts, end_time_=self._ts(end),
                assignee_=str(assignee) if assignee is not None else None,
            ))
        return rows

    def detail_rows(self, act_inst_ids: set[str]) -> list[DetailRow]:
        cols = ", ".join(DETAIL_COLUMNS)
        ids = sorted(act_inst_ids)
        rows: list[DetailRow] = []
        for i in range(0, len(ids), self.IN_CHUNK):
            chunk = ids[i:i + self.IN_CHUNK]
            marks = ", ".join("?" for _ in chunk)
            raws = self._execute(
                f"SELECT {cols} FROM {DETAIL_TABLE} WHERE act_inst_id_ IN ({marks})", chunk)
            for raw in raws:
                (act_inst_id, name, var_type, text, long_, double_, time_) = raw
                rows.append(DetailRow(
                    act_inst_id_=str(act_inst_id), name_=str(name), var_type_=str(var_type or ""),
                    text_=str(text) if text is not None else None,
                    long_=int(long_) if long_ is not None else None,
                    double_=float(double_) if double_ is not None else None,
                    time_=self._ts(time_),
                ))
        return rows


@dataclass
class ExtractResult:
    logs: dict[str, EventLog]
    state: WatermarkState
    skipped_incomplete: int = 0
    rejected_duplicates: int = 0
    dropped_details: int = 0

    @property
    def n_events(self) -> int:
        return sum(log_.n_events for log_ in self.logs.values())


def incremental_extract(source: TabularSource, state: WatermarkState) -> ExtractResult:
    """Extract exactly the completed rows not yet covered by ``state``.

    Returns per-key delta logs plus the advanced watermark state; the input
    state object is never mutated. Applying a sequence of deltas is
    equivalent to one full extraction of the final source contents.
    """
    rows = source.actinst_rows(state.min_high_time())
    fresh: list[ActInstRow] = []
    skipped_incomplete = 0
    for row in rows:
        if row.end_time_ is None:
            skipped_incomplete += 1
            continue
        if state.covers(row.proc_def_key_, row.end_time_, row.id_):
            continue
        fresh.append(row)

    parsed = parse_actinst_rows(fresh)
    # parse counts skipped incompletes among `fresh` only; none remain there.
    parsed.skipped_incomplete = skipped_incomplete
    if parsed.n_events or parsed.rejected_duplicates:
        ids = {e.event_id for pairs in parsed.events_by_key.values() for _, e in pairs}
        merge_detail_attributes(parsed, source.detail_rows(ids))

    new_state = state
    logs: dict[str, EventLog] = {}
    for key, pairs in parsed.events_by_key.items():
        logs[key] = build_log(pairs, key)
        new_state = new_state.advanced(key, [(e.end, e.event_id) for _, e in pairs])
    return ExtractResult(
        logs=logs,
        state=new_state,
        skipped_incomplete=parsed.skipped_incomplete,
        rejected_duplicates=parsed.rejected_duplicates,
        dropped_details=parsed.dropped_details,
    )
