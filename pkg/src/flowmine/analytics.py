"""Resource networks, case exploration, and gateway decision mining."""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime
from typing import Union

import numpy as np

from .bpmn import EXCLUSIVE_GATEWAY, BpmnGraph
from .eventlog import AttributeValue, EventLog
from .timestamps import epoch_ms, format_ts

log = logging.getLogger(__name__)

HANDOVER = "handover"
WORKING_TOGETHER = "working_together"
SIMILAR_ACTIVITIES = "similar_activities"
SNA_METRICS = (HANDOVER, WORKING_TOGETHER, SIMILAR_ACTIVITIES)


@dataclass
class ResourceMatrix:
    metric: str
    resources: list[str]
    values: list[list[float]]

    def value(self, r1: str, r2: str) -> float:
        return self.values[self.resources.index(r1)][self.resources.index(r2)]

    def to_json(self) -> dict:
        return {"metric": self.metric, "resources": self.resources, "values": self.values}


def _resources_of(event_log: EventLog) -> list[str]:
    return sorted({e.resource for e in event_log.iter_events() if e.resource is not None})


def handover_of_work(event_log: EventLog, normalize: bool = False) -> ResourceMatrix:
    """Directed counts of work transfers between adjacent resource-bearing events.

    Events without a resource are ignored and adjacency is recomputed over
    the remaining ones. With ``normalize`` each row is scaled to sum to 1.
    """
    resources = _resources_of(event_log)
    index = {r: i for i, r in enumerate(resources)}
    matrix = np.zeros((len(resources), len(resources)))
    for trace in event_log.traces:
        carriers = [e for e in trace.events if e.resource is not None]
        for prev, nxt in zip(carriers, carriers[1:]):
            matrix[index[prev.resource], index[nxt.resource]] += 1
    if normalize:
        sums = matrix.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            matrix = np.where(sums > 0, matrix / sums, 0.0)
    return ResourceMatrix(HANDOVER, resources, matrix.tolist())


def working_together(event_log: EventLog) -> ResourceMatrix:
    """Number of cases in which two resources both appear (diagonal: case count)."""
    resources = _resources_of(event_log)
    index = {r: i for i, r in enumerate(resources)}
    matrix = np.zeros((len(resources), len(resources)))
    for trace in event_log.traces:
        present = sorted({e.resource for e in trace.events if e.resource is not None})
        for r1 in present:
            for r2 in present:
                matrix[index[r1], index[r2]] += 1
    return ResourceMatrix(WORKING_TOGETHER, resources, matrix.tolist())


def similar_activities(event_log: EventLog) -> ResourceMatrix:
    """Cosine similarity between per-resource activity-frequency profiles."""
    resources = _resources_of(event_log)
    activities = sorted({e.activity for e in event_log.iter_events()})
    act_index = {a: i for i, a in enumerate(activities)}
    profiles = np.zeros((len(resources), max(1, len(activities))))
    res_index = {r: i for i, r in enumerate(resources)}
    for event in event_log.iter_events():
        if event.resource is not None:
            profiles[res_index[event.resource], act_index[event.activity]] += 1
    norms = np.linalg.norm(profiles, axis=1)
    matrix = np.zeros((len(resources), len(resources)))
    for i in range(len(resources)):
        for j in range(len(resources)):
            if norms[i] > 0 and norms[j] > 0:
                matrix[i, j] = float(np.dot(profiles[i], profiles[j]) / (norms[i] * norms[j]))
    return ResourceMatrix(SIMILAR_ACTIVITIES, resources, matrix.tolist())


def sna_matrix(event_log: EventLog, metric: str) -> ResourceMatrix:
    if metric == HANDOVER:
        return handover_of_work(event_log)
    if metric == WORKING_TOGETHER:
        return working_together(event_log)
    if metric == SIMILAR_ACTIVITIES:
        return similar_activities(event_log)
    raise ValueError(f"unknown SNA metric {metric!r}")


@dataclass(frozen=True)
class CaseSummary:
    case_id: str
    n_events: int
    start: datetime
    end: datetime

    @property
    def duration_seconds(self) -> float:
        return (self.end - self.start).total_seconds()

    def to_json(self) -> dict:
        return {
            "case_id": self.case_id,
            "n_events": self.n_events,
            "start": format_ts(self.start),
            "end": format_ts(self.end),
            "duration": self.duration_seconds,
        }


def case_statistics(event_log: EventLog) -> list[CaseSummary]:
    """Per-case summaries, longest duration first (ties by case id)."""
    summaries = [
        CaseSummary(
            case_id=trace.case_id,
            n_events=len(trace.events),
            start=trace.events[0].start,
            end=max(e.end for e in trace.events),
        )
        for trace in event_log.traces
    ]
    summaries.sort(key=lambda s: (-s.duration_seconds, s.case_id))
    return summaries


@dataclass(frozen=True)
class Guard:
    gateway_id: str
    branch: str  # outgoing flow id the predicate selects
    attribute: str
    comparator: str  # one of '<', '>=', '=='
    constant: AttributeValue
    support: int
    accuracy: float

    def to_json(self) -> dict:
        constant: Union[str, int, float, bool]
        if isinstance(self.constant, datetime):
            constant = format_ts(self.constant)
        else:
            constant = self.constant
        return {
            "gateway_id": self.gateway_id,
            "branch": self.branch,
            "attribute": self.attribute,
            "comparator": self.comparator,
            "constant": constant,
            "support": self.support,
            "accuracy": self.accuracy,
        }


def _entropy(counts: Counter) -> float:
    total = sum(counts.values())
    if total == 0:
        return 0.0
    return -sum((c / total) * math.log2(c / total) for c in counts.values() if c)


def _split_score(left: Counter, right: Counter, parent_entropy: float) -> tuple[float, float]:
    """(information gain, accuracy) of a binary split predicting majorities."""
    n_left, n_right = sum(left.values()), sum(right.values())
    total = n_left + n_right
    if n_left == 0 or n_right == 0:
        return -1.0, 0.0
    gain = parent_entropy - (n_left / total) * _entropy(left) - (n_right / total) * _entropy(right)
    correct = max(left.values()) + max(right.values())
    return gain, correct / total


@dataclass
class _Stump:
    attribute: str
    comparator: str
    constant: AttributeValue
    branch: str
    support: int
    accuracy: float
    gain: float


def _numeric_key(value) -> float:
    if isinstance(value, datetime):
        return float(epoch_ms(value))
    return float(value)


def _best_numeric_stump(attribute: str, rows: list[tuple[AttributeValue, str]]) -> _Stump | None:
    """Best threshold split ``value < constant`` by information gain.

    Thresholds sit at midpoints between consecutive distinct values; the
    reported branch is the majority on the predicate's true side (ties
    prefer the '<' side for determinism).
    """
    rows = sorted(rows, key=lambda r: _numeric_key(r[0]))
    values = [_numeric_key(v) for v, _ in rows]
    targets = [t for _, t in rows]
    parent = _entropy(Counter(targets))
    best: _Stump | None = None
    left: Counter = Counter()
    right = Counter(targets)
    for i in range(len(rows) - 1):
        left[targets[i]] += 1
        right[targets[i]] -= 1
        if values[i] == values[i + 1]:
            continue
        gain, accuracy = _split_score(left, right, parent)
        if best is None or (gain, accuracy) > (best.gain, best.accuracy):
            raw_mid = (values[i] + values[i + 1]) / 2.0
            constant: AttributeValue = raw_mid
            sample = rows[0][0]
            if isinstance(sample, datetime):
                from datetime import timezone
                constant = datetime.fromtimestamp(raw_mid / 1000.0, tz=timezone.utc)
            elif isinstance(sample, int) and not isinstance(sample, bool):
                constant = raw_mid  # midpoints of ints are reported as floats
            left_major = max(sorted(left), key=lambda t: (left[t], t))
            right_major = max(sorted(right), key=lambda t: (right[t], t))
            left_purity = left[left_major] / sum(left.values())
            right_purity = right[right_major] / sum(right.values())
            if right_purity > left_purity:
                comparator, branch = ">=", right_major
            else:
                comparator, branch = "<", left_major
            best = _Stump(attribute, comparator, constant, branch,
                          support=len(rows), accuracy=accuracy, gain=gain)
    return best


def _best_categorical_stump(attribute: str, rows: list[tuple[AttributeValue, str]]) -> _Stump | None:
    """Best equality split ``value == constant`` by information gain."""
    targets = [t for _, t in rows]
    parent = _entropy(Counter(targets))
    best: _Stump | None = None
    for candidate in sorted({v for v, _ in rows}, key=str):
        left = Counter(t for v, t in rows if v == candidate)
        right = Counter(t for v, t in rows if v != candidate)
        gain, accuracy = _split_score(left, right, parent)
        if sum(left.values()) == 0 or sum(right.values()) == 0:
            continue
        if best is None or (gain, accuracy) > (best.gain, best.accuracy):
            branch = max(sorted(left), key=lambda t: (left[t], t))
            best = _Stump(attribute, "==", candidate, branch,
                          support=len(rows), accuracy=accuracy, gain=gain)
    return best


def decision_mining(event_log: EventLog, graph: BpmnGraph,
                    min_accuracy: float = 0.75, min_support: int = 2) -> list[Guard]:
    """Learn one guard per exclusive gateway from case attribute snapshots.

    For every logged traversal of a gateway with >= 2 outgoing flows, the
    training instance pairs the attributes seen so far in the trace (last
    write wins) with the branch actually taken (the next event's element id
    resolved to an outgoing flow). Per attribute a depth-1 stump is fit;
    the best one is emitted as a guard unless its training accuracy falls
    below ``min_accuracy``. Deliberately shallow: deeper models overfit
    engine data where most guards are already modeled.
    """
    gateways = {
        node.id: {flow.target: flow.id for flow in graph.out_flows(node.id)}
        for node in graph.nodes_of_kind(EXCLUSIVE_GATEWAY)
        if len(graph.out_flows(node.id)) >= 2
    }
    gateway_types_seen = set()
    instances: dict[str, list[tuple[dict[str, AttributeValue], str]]] = defaultdict(list)
    for trace in event_log.traces:
        snapshot: dict[str, AttributeValue] = {}
        events = trace.events
        for i, event in enumerate(events):
            snapshot.update(event.attributes)
            if event.activity_type == EXCLUSIVE_GATEWAY and event.activity_id not in graph.nodes:
                gateway_types_seen.add(event.activity_id)
                continue
            branches = gateways.get(event.activity_id)
            if branches is None or i + 1 >= len(events):
                continue
            flow_id = branches.get(events[i + 1].activity_id)
            if flow_id is None:
                continue
            instances[event.activity_id].append((dict(snapshot), flow_id))
    for unknown in sorted(gateway_types_seen):
        log.warning("gateway event %r has no node in the model; skipped", unknown)

    guards: list[Guard] = []
    for gateway_id in sorted(instances):
        rows = instances[gateway_id]
        taken = {flow_id for _, flow_id in rows}
        if len(taken) < 2 or len(rows) < min_support:
            continue
        by_attribute: dict[str, list[tuple[AttributeValue, str]]] = defaultdict(list)
        for snapshot, flow_id in rows:
            for name, value in snapshot.items():
                by_attribute[name].append((value, flow_id))
        candidates: list[_Stump] = []
        for name in sorted(by_attribute):
            pairs = by_attribute[name]
            numeric = [(v, t) for v, t in pairs
                       if isinstance(v, (int, float, datetime)) and not isinstance(v, bool)]
            categorical = [(v, t) for v, t in pairs if isinstance(v, (str, bool))]
            if len(numeric) >= min_support and len({t for _, t in numeric}) >= 2:
                stump = _best_numeric_stump(name, numeric)
                if stump:
                    candidates.append(stump)
            if len(categorical) >= min_support and len({t for _, t in categorical}) >= 2:
                stump = _best_categorical_stump(name, categorical)
                if stump:
                    candidates.append(stump)
        if not candidates:
            continue
        best = max(candidates, key=lambda s: (s.accuracy, s.gain, s.support, s.attribute))
        if best.accuracy < min_accuracy:
            log.info("gateway %r: best stump accuracy %.2f below floor %.2f, suppressed",
                     gateway_id, best.accuracy, min_accuracy)
            continue
        guards.append(Guard(
            gateway_id=gateway_id,
            branch=best.branch,
            attribute=best.attribute,
            comparator=best.comparator,
            constant=best.constant,
            support=best.support,
            accuracy=best.accuracy,
        ))
    return guards
