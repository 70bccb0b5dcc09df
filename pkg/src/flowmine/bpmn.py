"""BPMN 2.0 models: parsing, collection loading, conversion, decoration.

Parsing is total over node kinds; conversion supports the structured
fragment (start/end events, tasks, exclusive and parallel gateways) and
fails loudly on anything else rather than guessing semantics. Decoration
exploits that engine logs record gateway traversals: node and flow
frequencies come straight from activity-element ids and their adjacency,
no replay needed.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import httpx

from .eventlog import EventLog
from .petri import PetriNet, make_net

log = logging.getLogger(__name__)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"

START_EVENT = "startEvent"
END_EVENT = "endEvent"
EXCLUSIVE_GATEWAY = "exclusiveGateway"
PARALLEL_GATEWAY = "parallelGateway"

TASK_KINDS = {
    "task", "userTask", "serviceTask", "scriptTask", "sendTask", "receiveTask",
    "manualTask", "businessRuleTask", "callActivity",
}
EVENT_KINDS = {
    START_EVENT, END_EVENT, "intermediateCatchEvent", "intermediateThrowEvent",
    "boundaryEvent",
}
GATEWAY_KINDS = {
    EXCLUSIVE_GATEWAY, PARALLEL_GATEWAY, "inclusiveGateway", "eventBasedGateway",
    "complexGateway",
}
OTHER_FLOW_NODE_KINDS = {"subProcess", "transaction", "adHocSubProcess"}
FLOW_NODE_KINDS = TASK_KINDS | EVENT_KINDS | GATEWAY_KINDS | OTHER_FLOW_NODE_KINDS

CONVERTIBLE_KINDS = TASK_KINDS | {START_EVENT, END_EVENT, EXCLUSIVE_GATEWAY, PARALLEL_GATEWAY}


class BpmnError(Exception):
    pass


class BpmnParseError(BpmnError):
    pass


class ConversionError(BpmnError):
    pass


class UnsupportedConstruct(ConversionError):
    def __init__(self, kind: str, node_id: str):
        self.kind = kind
        self.node_id = node_id
        super().__init__(f"unsupported BPMN construct {kind!r} (node {node_id!r})")


@dataclass(frozen=True)
class BpmnNode:
    id: str
    name: str
    kind: str


@dataclass(frozen=True)
class SequenceFlow:
    id: str
    source: str
    target: str


@dataclass
class BpmnGraph:
    process_id: str
    nodes: dict[str, BpmnNode] = field(default_factory=dict)
    flows: list[SequenceFlow] = field(default_factory=list)

    def in_flows(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.flows if f.target == node_id]

    def out_flows(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.flows if f.source == node_id]

    def nodes_of_kind(self, kind: str) -> list[BpmnNode]:
        return [n for n in self.nodes.values() if n.kind == kind]


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_bpmn(data: Union[str, bytes]) -> BpmnGraph:
    """Parse one BPMN 2.0 document into a flow-node graph.

    All flow nodes are captured, with kinds outside the converter's
    vocabulary preserved verbatim. Raises :class:`BpmnParseError` on
    malformed XML or sequence flows referencing unknown nodes.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise BpmnParseError(f"malformed BPMN XML: {exc}") from exc

    process_id = ""
    nodes: dict[str, BpmnNode] = {}
    raw_flows: list[tuple[str, str | None, str | None]] = []
    for el in root.iter():
        kind = _local(el.tag)
        el_id = el.get("id")
        if kind == "process" and not process_id:
            process_id = el_id or ""
        if el_id is None:
            continue
        if kind == "sequenceFlow":
            raw_flows.append((el_id, el.get("sourceRef"), el.get("targetRef")))
        elif kind in FLOW_NODE_KINDS:
            nodes[el_id] = BpmnNode(id=el_id, name=el.get("name") or "", kind=kind)

    flows = []
    for flow_id, source, target in raw_flows:
        if not source or not target:
            raise BpmnParseError(f"sequenceFlow {flow_id!r} missing sourceRef/targetRef")
        for ref in (source, target):
            if ref not in nodes:
                raise BpmnParseError(f"sequenceFlow {flow_id!r} references unknown node {ref!r}")
        flows.append(SequenceFlow(id=flow_id, source=source, target=target))
    return BpmnGraph(process_id=process_id, nodes=nodes, flows=flows)


def load_models_dir(directory: Union[str, Path]) -> dict[str, BpmnGraph]:
    """Scan a directory for ``*.bpmn`` files; key by process id (file stem fallback)."""
    directory = Path(directory)
    models: dict[str, BpmnGraph] = {}
    for path in sorted(directory.glob("*.bpmn")):
        try:
            graph = parse_bpmn(path.read_bytes())
        except (OSError, BpmnParseError) as exc:
            log.warning("skipping unreadable model %s: %s", path, exc)
            continue
        models[graph.process_id or path.stem] = graph
    return models


def fetch_models_rest(base_url: str, client: httpx.Client | None = None) -> dict[str, str]:
    """Fetch the latest process definitions' diagram XML over REST, keyed by definition key."""
    own_client = client is None
    client = client or httpx.Client()
    base = base_url.rstrip("/")
    documents: dict[str, str] = {}
    failures: list[str] = []
    try:
        response = client.get(f"{base}/process-definition", params={"latestVersion": "true"})
        response.raise_for_status()
        definitions = response.json()
        for definition in definitions:
            def_id = definition.get("id")
            key = definition.get("key") or def_id
            try:
                xml_response = client.get(f"{base}/process-definition/{def_id}/xml")
                xml_response.raise_for_status()
                documents[key] = xml_response.json()["bpmn20Xml"]
            except (httpx.HTTPError, KeyError) as exc:
                failures.append(f"{key}: {exc}")
                log.warning("failed to fetch model %r: %s", key, exc)
    except httpx.HTTPError as exc:
        raise BpmnError(f"cannot enumerate process definitions at {base}: {exc}") from exc
    finally:
        if own_client:
            client.close()
    if failures and not documents:
        raise BpmnError("all model fetches failed: " + "; ".join(failures))
    return documents


def load_models_rest(base_url: str, client: httpx.Client | None = None) -> dict[str, BpmnGraph]:
    """Fetch the latest process definitions and parse their diagrams."""
    models = {}
    for key, xml in fetch_models_rest(base_url, client).items():
        try:
            models[key] = parse_bpmn(xml)
        except BpmnParseError as exc:
            log.warning("failed to parse model %r: %s", key, exc)
    return models


def load_models(source: Union[str, Path]) -> dict[str, BpmnGraph]:
    text = str(source)
    if text.startswith(("http://", "https://")):
        return load_models_rest(text)
    return load_models_dir(source)


def transition_label(node: BpmnNode) -> str:
    return node.name or node.id


def bpmn_to_petri(graph: BpmnGraph) -> PetriNet:
    """Convert the supported BPMN fragment to a workflow net.

    Each sequence flow becomes a place; tasks and events become labeled
    transitions, exclusive gateways one silent transition per in/out flow
    pair, parallel gateways a single silent transition over all flows. A
    fresh source place feeds the single start event and every end event
    produces into a fresh sink place.
    """
    for node in graph.nodes.values():
        if node.kind not in CONVERTIBLE_KINDS:
            raise UnsupportedConstruct(node.kind, node.id)
    starts = graph.nodes_of_kind(START_EVENT)
    ends = graph.nodes_of_kind(END_EVENT)
    if len(starts) != 1:
        raise ConversionError(f"expected exactly one start event, found {len(starts)}")
    if not ends:
        raise ConversionError("no end event")

    source, sink = "__source__", "__sink__"
    places = {source, sink}
    for flow in graph.flows:
        if flow.id in places:
            raise ConversionError(f"flow id collides with reserved place name: {flow.id!r}")
        places.add(flow.id)

    transitions: list[tuple[str, str | None]] = []
    arcs: list[tuple[str, str]] = []
    for node in graph.nodes.values():
        ins = [f.id for f in graph.in_flows(node.id)]
        outs = [f.id for f in graph.out_flows(node.id)]
        if node.kind == START_EVENT:
            if ins:
                raise ConversionError(f"start event {node.id!r} has incoming flows")
            if len(outs) != 1:
                raise ConversionError(f"start event {node.id!r} needs exactly one outgoing flow")
            transitions.append((node.id, transition_label(node)))
            arcs.append((source, node.id))
            arcs.append((node.id, outs[0]))
        elif node.kind == END_EVENT:
            if outs:
                raise ConversionError(f"end event {node.id!r} has outgoing flows")
            if len(ins) != 1:
                raise ConversionError(f"end event {node.id!r} needs exactly one incoming flow")
            transitions.append((node.id, transition_label(node)))
            arcs.append((ins[0], node.id))
            arcs.append((node.id, sink))
        elif node.kind == EXCLUSIVE_GATEWAY:
            if not ins or not outs:
                raise ConversionError(f"gateway {node.id!r} needs incoming and outgoing flows")
            for in_flow in ins:
                for out_flow in outs:
                    tid = f"{node.id}__{in_flow}__{out_flow}"
                    transitions.append((tid, None))
                    arcs.append((in_flow, tid))
                    arcs.append((tid, out_flow))
        elif node.kind == PARALLEL_GATEWAY:
            if not ins or not outs:
                raise ConversionError(f"gateway {node.id!r} needs incoming and outgoing flows")
            transitions.append((node.id, None))
            for in_flow in ins:
                arcs.append((in_flow, node.id))
            for out_flow in outs:
                arcs.append((node.id, out_flow))
        else:  # task-like
            if len(ins) != 1 or len(outs) != 1:
                raise ConversionError(
                    f"task {node.id!r} must have exactly one incoming and one outgoing flow "
                    f"(found {len(ins)}/{len(outs)}); normalize the model instead of guessing")
            transitions.append((node.id, transition_label(node)))
            arcs.append((ins[0], node.id))
            arcs.append((node.id, outs[0]))

    return make_net(places, transitions, arcs, {source: 1}, {sink: 1})


@dataclass
class DecoratedModel:
    node_frequency: dict[str, int]
    node_mean_duration: dict[str, float]
    flow_frequency: dict[str, int]
    unmatched: dict[str, int]

    def to_json(self) -> dict:
        return {
            "nodes": {
                node_id: {"frequency": self.node_frequency[node_id],
                          "mean_duration": self.node_mean_duration[node_id]}
                for node_id in sorted(self.node_frequency)
            },
            "flows": {
                flow_id: {"frequency": self.flow_frequency[flow_id]}
                for flow_id in sorted(self.flow_frequency)
            },
            "unmatched": dict(sorted(self.unmatched.items())),
        }


def decorate_model(graph: BpmnGraph, event_log: EventLog) -> DecoratedModel:
    """Frequency/performance decoration from logged element ids.

    Node frequency counts events per activity-element id, node duration is
    the mean event interval in seconds, and flow frequency counts adjacent
    event pairs whose element ids match the flow endpoints. Events whose
    element id does not occur in the graph are reported as unmatched.
    """
    node_count: Counter = Counter()
    node_duration: Counter = Counter()
    unmatched: Counter = Counter()
    flows_by_pair: dict[tuple[str, str], list[str]] = {}
    for flow in graph.flows:
        flows_by_pair.setdefault((flow.source, flow.target), []).append(flow.id)
    flow_count: Counter = Counter()

    for trace in event_log.traces:
        for event in trace.events:
            if event.activity_id in graph.nodes:
                node_count[event.activity_id] += 1
                node_duration[event.activity_id] += event.duration_seconds
            else:
                unmatched[event.activity_id] += 1
        for prev, nxt in zip(trace.events, trace.events[1:]):
            for flow_id in flows_by_pair.get((prev.activity_id, nxt.activity_id), ()):
                flow_count[flow_id] += 1

    return DecoratedModel(
        node_frequency={nid: node_count[nid] for nid in graph.nodes},
        node_mean_duration={
            nid: (node_duration[nid] / node_count[nid] if node_count[nid] else 0.0)
            for nid in graph.nodes
        },
        flow_frequency={f.id: flow_count[f.id] for f in graph.flows},
        unmatched=dict(unmatched),
    )
