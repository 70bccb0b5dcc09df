"""XES 1.0 serialization of event logs.

Events are exported as interval events: ``time:timestamp`` carries the end
time and the start rides along as a ``start_timestamp`` attribute. Logs
produced here round-trip exactly through :func:`import_xes`; foreign XES is
accepted as long as events carry ``concept:name`` and ``time:timestamp``.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from datetime import datetime
from typing import Union

from .eventlog import AttributeValue, Event, EventLog, LogError, build_log
from .timestamps import format_ts, parse_ts

XES_NS = "http://www.xes-standard.org/"

# Keys the exporter owns; everything else on an event is a custom attribute.
RESERVED_EVENT_KEYS = {
    "concept:name",
    "time:timestamp",
    "org:resource",
    "activity_id",
    "activity_type",
    "start_timestamp",
    "event_id",
}


class XesFormatError(LogError):
    pass


def _attr_element(parent: ET.Element, key: str, value: AttributeValue) -> None:
    if isinstance(value, bool):
        ET.SubElement(parent, "boolean", key=key, value="true" if value else "false")
    elif isinstance(value, int):
        ET.SubElement(parent, "int", key=key, value=str(value))
    elif isinstance(value, float):
        ET.SubElement(parent, "float", key=key, value=repr(value))
    elif isinstance(value, datetime):
        ET.SubElement(parent, "date", key=key, value=format_ts(value))
    else:
        ET.SubElement(parent, "string", key=key, value=str(value))


def export_xes(log: EventLog) -> str:
    root = ET.Element("log", attrib={"xes.version": "1.0", "xmlns": XES_NS})
    ET.SubElement(root, "extension", name="Concept", prefix="concept",
                  uri="http://www.xes-standard.org/concept.xesext")
    ET.SubElement(root, "extension", name="Time", prefix="time",
                  uri="http://www.xes-standard.org/time.xesext")
    ET.SubElement(root, "extension", name="Organizational", prefix="org",
                  uri="http://www.xes-standard.org/org.xesext")
    _attr_element(root, "concept:name", log.process_key)
    for trace in log.traces:
        trace_el = ET.SubElement(root, "trace")
        _attr_element(trace_el, "concept:name", trace.case_id)
        for event in trace.events:
            ev_el = ET.SubElement(trace_el, "event")
            _attr_element(ev_el, "concept:name", event.activity)
            _attr_element(ev_el, "time:timestamp", event.end)
            if event.resource is not None:
                _attr_element(ev_el, "org:resource", event.resource)
            _attr_element(ev_el, "activity_id", event.activity_id)
            _attr_element(ev_el, "activity_type", event.activity_type)
            _attr_element(ev_el, "start_timestamp", event.start)
            _attr_element(ev_el, "event_id", event.event_id)
            for key in event.attributes:
                _attr_element(ev_el, key, event.attributes[key])
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_attr(el: ET.Element, where: str) -> tuple[str, AttributeValue]:
    key = el.get("key")
    raw = el.get("value")
    if key is None or raw is None:
        raise XesFormatError(f"{where}: attribute element without key/value")
    kind = _local(el.tag)
    try:
        if kind == "int":
            return key, int(raw)
        if kind == "float":
            return key, float(raw)
        if kind == "boolean":
            return key, raw.strip().lower() == "true"
        if kind == "date":
            return key, parse_ts(raw)
    except ValueError as exc:
        raise XesFormatError(f"{where}: bad {kind} value for {key!r}: {raw!r}") from exc
    return key, raw


def import_xes(data: Union[str, bytes]) -> EventLog:
    """Parse an XES document into an event log.

    For events missing ``start_timestamp`` the start defaults to the end
    time; missing ``event_id`` / trace names are synthesized positionally.
    Raises :class:`XesFormatError` on malformed XML or events lacking
    ``concept:name`` / ``time:timestamp``.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XesFormatError(f"malformed XES XML: {exc}") from exc
    if _local(root.tag) != "log":
        raise XesFormatError(f"expected <log> root, got <{_local(root.tag)}>")

    process_key = ""
    for child in root:
        if _local(child.tag) != "trace" and child.get("key") == "concept:name":
            process_key = str(child.get("value") or "")

    pairs: list[tuple[str, Event]] = []
    trace_index = 0
    for trace_el in root:
        if _local(trace_el.tag) != "trace":
            continue
        where = f"trace {trace_index}"
        case_id = f"case_{trace_index}"
        events: list[ET.Element] = []
        for child in trace_el:
            if _local(child.tag) == "event":
                events.append(child)
            elif child.get("key") == "concept:name":
                case_id = str(child.get("value") or case_id)
        for ev_index, ev_el in enumerate(events):
            attrs: dict[str, AttributeValue] = {}
            for attr_el in ev_el:
                key, value = _parse_attr(attr_el, where)
                attrs[key] = value
            if "concept:name" not in attrs:
                raise XesFormatError(f"{where}: event {ev_index} missing concept:name")
            if "time:timestamp" not in attrs:
                raise XesFormatError(f"{where}: event {ev_index} missing time:timestamp")
            end = attrs["time:timestamp"]
            if not isinstance(end, datetime):
                raise XesFormatError(f"{where}: event {ev_index} has non-date time:timestamp")
            start = attrs.get("start_timestamp", end)
            if not isinstance(start, datetime):
                raise XesFormatError(f"{where}: event {ev_index} has non-date start_timestamp")
            resource = attrs.get("org:resource")
            event = Event(
                event_id=str(attrs.get("event_id") or f"t{trace_index}e{ev_index}"),
                activity=str(attrs["concept:name"]),
                activity_id=str(attrs.get("activity_id", "")),
                activity_type=str(attrs.get("activity_type", "")),
                start=start,
                end=end,
                resource=None if resource is None else str(resource),
                attributes={k: v for k, v in attrs.items() if k not in RESERVED_EVENT_KEYS},
            )
            pairs.append((case_id, event))
        trace_index += 1
    return build_log(pairs, process_key)
