"""Event-log model, XES and CSV serialization."""

import random
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowmine.csvlog import CsvFormatError, export_csv, import_csv
from flowmine.eventlog import (
    DuplicateEventIdError,
    Event,
    build_log,
    filter_activity_types,
)
from flowmine.timestamps import format_ts, parse_ts, utc_ms
from flowmine.xes import XesFormatError, export_xes, import_xes

from gen import log_from_sequences, random_log
from oracles import reference_grouping

T0 = datetime(2021, 5, 1, tzinfo=timezone.utc)


def ev(eid, activity="a", start_min=0, end_min=None, **kw):
    start = utc_ms(T0 + timedelta(minutes=start_min))
    end = utc_ms(T0 + timedelta(minutes=end_min if end_min is not None else start_min))
    return Event(event_id=eid, activity=activity, activity_id=kw.pop("activity_id", activity),
                 activity_type=kw.pop("activity_type", "userTask"),
                 start=start, end=end, **kw)


class TestBuildLog:
    def test_empty_input(self):
        log = build_log([], "p")
        assert len(log.traces) == 0
        assert log.process_key == "p"

    def test_sorts_within_trace(self):
        e_a = ev("e1", "a", start_min=10)
        e_b = ev("e2", "b", start_min=5)
        log = build_log([("c1", e_a), ("c1", e_b)], "p")
        assert [e.activity for e in log.traces[0].events] == ["b", "a"]

    def test_duplicate_event_id_rejected(self):
        with pytest.raises(DuplicateEventIdError) as err:
            build_log([("c1", ev("dup")), ("c2", ev("dup"))], "p")
        assert "dup" in str(err.value)

    def test_matches_sort_then_group_oracle(self):
        rng = random.Random(42)
        for _ in range(20):
            pairs = []
            for i in range(rng.randint(0, 200)):
                pairs.append((f"c{rng.randrange(12)}",
                              ev(f"e{i}", start_min=rng.randrange(100), end_min=rng.randrange(100, 200))))
            expected = reference_grouping(pairs)
            log = build_log(pairs, "p")
            assert [t.case_id for t in log.traces] == list(expected)
            for trace in log.traces:
                assert [e.event_id for e in trace.events] == expected[trace.case_id]

    def test_shuffled_equals_presorted(self):
        rng = random.Random(7)
        pairs = [(f"c{rng.randrange(50)}", ev(f"e{i}", start_min=rng.randrange(500)))
                 for i in range(1000)]
        shuffled = pairs[:]
        rng.shuffle(shuffled)
        a = build_log(pairs, "p")
        b = build_log(shuffled, "p")
        assert {t.case_id: t.events for t in a.traces} == {t.case_id: t.events for t in b.traces}

    @settings(max_examples=50, deadline=None)
    @given(st.data())
    def test_sort_invariant_property(self, data):
        n = data.draw(st.integers(0, 40))
        pairs = []
        for i in range(n):
            start = data.draw(st.integers(0, 100))
            end = start + data.draw(st.integers(0, 50))
            pairs.append((f"c{data.draw(st.integers(0, 5))}",
                          ev(f"e{i}", start_min=start, end_min=end)))
        log = build_log(pairs, "p")
        for trace in log.traces:
            keys = [e.sort_key for e in trace.events]
            assert keys == sorted(keys)
            assert len(trace.events) > 0


class TestFilterActivityTypes:
    def test_keep_all_is_identity(self):
        log = random_log(random.Random(1))
        types = {e.activity_type for e in log.iter_events()}
        assert filter_activity_types(log, types) == log

    def test_direct_filter(self):
        pairs = [("c1", ev("e1", "a", 0, activity_type="userTask")),
                 ("c1", ev("e2", "g", 1, activity_type="exclusiveGateway")),
                 ("c1", ev("e3", "b", 2, activity_type="userTask"))]
        log = build_log(pairs, "p")
        filtered = filter_activity_types(log, {"userTask"})
        assert [e.activity for e in filtered.traces[0].events] == ["a", "b"]

    def test_empty_keep_drops_everything(self):
        log = random_log(random.Random(2))
        assert len(filter_activity_types(log, set()).traces) == 0

    def test_idempotent_and_monotone(self):
        rng = random.Random(3)
        for _ in range(10):
            log = random_log(rng)
            types = sorted({e.activity_type for e in log.iter_events()})
            keep1 = set(rng.sample(types, k=len(types) // 2)) if types else set()
            keep2 = keep1 | set(types[:1])
            once = filter_activity_types(log, keep1)
            assert filter_activity_types(once, keep1) == once
            ids1 = {e.event_id for e in once.iter_events()}
            ids2 = {e.event_id for e in filter_activity_types(log, keep2).iter_events()}
            assert ids1 <= ids2


class TestXes:
    def test_empty_log(self):
        doc = export_xes(build_log([], "empty"))
        log = import_xes(doc)
        assert len(log.traces) == 0
        assert log.process_key == "empty"

    def test_single_event_standard_keys(self):
        log = build_log([("c1", ev("e1", "Approve", 0, 5, resource="demo"))], "invoice")
        doc = export_xes(log)
        for key in ("concept:name", "time:timestamp", "activity_id",
                    "activity_type", "start_timestamp", "org:resource"):
            assert f'key="{key}"' in doc
        assert doc.count("<trace>") == 1
        assert doc.count("<event>") == 1

    def test_round_trip_random_logs(self):
        rng = random.Random(11)
        for _ in range(30):
            log = random_log(rng)
            assert import_xes(export_xes(log)) == log

    def test_missing_start_defaults_to_end(self):
        doc = """<log xmlns="http://www.xes-standard.org/"><trace>
            <string key="concept:name" value="c1"/>
            <event>
              <string key="concept:name" value="a"/>
              <date key="time:timestamp" value="2021-05-01T00:00:00.000+00:00"/>
            </event></trace></log>"""
        log = import_xes(doc)
        event = log.traces[0].events[0]
        assert event.start == event.end

    def test_truncated_xml_is_error(self):
        doc = export_xes(random_log(random.Random(5)))
        with pytest.raises(XesFormatError):
            import_xes(doc[: len(doc) // 2])

    def test_missing_concept_name_names_trace(self):
        doc = """<log xmlns="http://www.xes-standard.org/"><trace>
            <event><date key="time:timestamp" value="2021-05-01T00:00:00.000+00:00"/></event>
            </trace></log>"""
        with pytest.raises(XesFormatError) as err:
            import_xes(doc)
        assert "trace 0" in str(err.value)


class TestCsv:
    def test_single_event_two_lines(self):
        log = build_log([("c1", ev("e1", "a", 0, 1))], "p")
        lines = export_csv(log).decode("utf-8").strip().splitlines()
        assert len(lines) == 2
        assert lines[0] == "case_id,event_id,activity,activity_id,activity_type,start,end,resource"

    def test_round_trip_random_logs(self):
        rng = random.Random(13)
        for _ in range(30):
            log = random_log(rng)
            assert import_csv(export_csv(log), process_key=log.process_key) == log

    def test_bad_timestamp_cites_line(self):
        log = build_log([("c1", ev("e1", "a")), ("c1", ev("e2", "b", 1))], "p")
        text = export_csv(log).decode("utf-8")
        bad = text.replace(format_ts(log.traces[0].events[1].start), "not-a-date")
        with pytest.raises(CsvFormatError) as err:
            import_csv(bad)
        assert "line 3" in str(err.value)
        assert "start" in str(err.value)

    def test_header_mismatch(self):
        with pytest.raises(CsvFormatError):
            import_csv("case,event\n")

    def test_rfc4180_quoting(self):
        log = build_log([("c,1", ev("e1", 'say "hi"\nplease', 0, 1))], "p")
        assert import_csv(export_csv(log), process_key="p") == log


def test_timestamp_parse_format_round_trip():
    stamps = ["2021-05-01T00:00:00.000+00:00", "2021-05-01T02:30:00.123+02:00",
              "2021-05-01T00:00:00Z"]
    for raw in stamps:
        dt = parse_ts(raw)
        assert parse_ts(format_ts(dt)) == dt
        assert dt.tzinfo is not None


def test_log_from_sequences_helper():
    log = log_from_sequences([("a", "b"), ("a",)])
    assert log.activity_sequences() == [("a", "b"), ("a",)]


def test_round_trip_non_ascii_names():
    from flowmine.eventlog import Event
    pairs = [("案例-1", Event(event_id="е1", activity="Prüfung starten",
                              activity_id="prüfen", activity_type="userTask",
                              start=ev("x").start, end=ev("x").end, resource="Лена",
                              attributes={"notiz": "naïve — ok", "betrag": 12.5})),
             ("案例-1", Event(event_id="e2", activity="确认结果",
                              activity_id="确认", activity_type="serviceTask",
                              start=ev("x", start_min=1).start, end=ev("x", start_min=2).end))]
    log = build_log(pairs, "процесс")
    assert import_xes(export_xes(log)) == log
    assert import_csv(export_csv(log), process_key=log.process_key) == log
