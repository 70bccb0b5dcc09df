"""Token-based replay fitness and escaping-edges precision.

Counting convention for replay: producing the initial marking counts into
``produced``, consuming the final marking counts into ``consumed``. Silent
transitions are fired via a bounded breadth-first search for the shortest
enabling sequence before any missing token is inserted; their consumptions
and productions are counted like any other firing. Events whose label has
no transition in the net count one missing and one consumed token each.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .eventlog import EventLog
from .petri import Marking, PetriNet, fire, is_enabled

_SEARCH_STATE_CAP = 20_000


@dataclass
class TraceFitness:
    case_id: str
    missing: int = 0
    remaining: int = 0
    consumed: int = 0
    produced: int = 0

    @property
    def fitness(self) -> float:
        value = 0.0
        value += 0.5 * (1.0 - self.missing / self.consumed) if self.consumed else 0.5
        value += 0.5 * (1.0 - self.remaining / self.produced) if self.produced else 0.5
        return value


@dataclass
class FitnessResult:
    traces: list[TraceFitness] = field(default_factory=list)

    @property
    def missing(self) -> int:
        return sum(t.missing for t in self.traces)

    @property
    def remaining(self) -> int:
        return sum(t.remaining for t in self.traces)

    @property
    def consumed(self) -> int:
        return sum(t.consumed for t in self.traces)

    @property
    def produced(self) -> int:
        return sum(t.produced for t in self.traces)

    @property
    def fitness(self) -> float:
        value = 0.0
        value += 0.5 * (1.0 - self.missing / self.consumed) if self.consumed else 0.5
        value += 0.5 * (1.0 - self.remaining / self.produced) if self.produced else 0.5
        return value

    @property
    def n_perfect(self) -> int:
        return sum(1 for t in self.traces if t.missing == 0 and t.remaining == 0)

    def to_json(self) -> dict:
        return {
            "fitness": self.fitness,
            "missing": self.missing,
            "remaining": self.remaining,
            "consumed": self.consumed,
            "produced": self.produced,
            "n_traces": len(self.traces),
            "n_perfect_traces": self.n_perfect,
            "traces": [
                {"case_id": t.case_id, "fitness": t.fitness, "missing": t.missing,
                 "remaining": t.remaining, "consumed": t.consumed, "produced": t.produced}
                for t in self.traces
            ],
        }


def _marking_key(marking: Marking) -> frozenset:
    return frozenset(marking.items())


def _silent_path(net: PetriNet, marking: Marking, goal, depth_cap: int) -> list[str] | None:
    """Shortest sequence of silent firings after which ``goal(marking)`` holds.

    Returns None when no such sequence exists within the depth cap. The
    empty sequence is returned when the goal already holds.
    """
    if goal(marking):
        return []
    silents = net.silent_ids()
    start_key = _marking_key(marking)
    seen = {start_key}
    queue: deque[tuple[Marking, list[str]]] = deque([(marking, [])])
    while queue:
        current, path = queue.popleft()
        if len(path) >= depth_cap:
            continue
        for t in silents:
            if not is_enabled(net, current, t):
                continue
            nxt = fire(net, current, t)
            key = _marking_key(nxt)
            if key in seen:
                continue
            seen.add(key)
            new_path = path + [t]
            if goal(nxt):
                return new_path
            if len(seen) < _SEARCH_STATE_CAP:
                queue.append((nxt, new_path))
    return None


def replay_fitness(log: EventLog, net: PetriNet) -> FitnessResult:
    """Force every trace through the net, counting token sins; total."""
    by_label: dict[str, list[str]] = {}
    for tid in sorted(net.transitions):
        label = net.transitions[tid].label
        if label is not None:
            by_label.setdefault(label, []).append(tid)
    depth_cap = 2 * max(1, len(net.transitions))
    result = FitnessResult()

    for trace in log.traces:
        tf = TraceFitness(case_id=trace.case_id)
        marking = Counter(net.initial)
        tf.produced += sum(net.initial.values())

        def fire_counted(t: str) -> None:
            nonlocal marking
            tf.consumed += len(net.pre(t))
            tf.produced += len(net.post(t))
            marking = fire(net, marking, t)

        for event in trace.events:
            candidates = by_label.get(event.activity)
            if not candidates:
                tf.missing += 1
                tf.consumed += 1
                continue
            chosen = next((t for t in candidates if is_enabled(net, marking, t)), None)
            if chosen is None:
                path = _silent_path(
                    net, marking,
                    lambda m: any(is_enabled(net, m, t) for t in candidates),
                    depth_cap,
                )
                if path:
                    for silent in path:
                        fire_counted(silent)
                    chosen = next(t for t in candidates if is_enabled(net, marking, t))
            if chosen is None:
                # Force the candidate needing the fewest token insertions.
                def deficit(t: str) -> int:
                    return sum(1 for p in net.pre(t) if marking[p] < 1)
                chosen = min(candidates, key=lambda t: (deficit(t), t))
                for p in net.pre(chosen):
                    if marking[p] < 1:
                        marking[p] += 1
                        tf.missing += 1
            fire_counted(chosen)

        # Trace end: reach and consume the final marking.
        def final_covered(m: Marking) -> bool:
            return all(m[p] >= c for p, c in net.final.items())

        path = _silent_path(net, marking, final_covered, depth_cap)
        if path:
            for silent in path:
                fire_counted(silent)
        if path is None:
            for p, count in net.final.items():
                shortfall = count - marking[p]
                if shortfall > 0:
                    marking[p] += shortfall
                    tf.missing += shortfall
        for p, count in net.final.items():
            marking[p] -= count
            tf.consumed += count
            if marking[p] == 0:
                del marking[p]
        tf.remaining += sum(marking.values())
        result.traces.append(tf)
    return result


@dataclass
class PrecisionResult:
    escaping: float = 0.0
    allowed: float = 0.0
    skipped_prefixes: int = 0

    @property
    def precision(self) -> float:
        if self.allowed == 0:
            return 1.0
        return 1.0 - self.escaping / self.allowed

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "escaping": self.escaping,
            "allowed": self.allowed,
            "skipped_prefixes": self.skipped_prefixes,
        }


def _closure(net: PetriNet, markings: set[frozenset], cap: int = _SEARCH_STATE_CAP) -> set[frozenset]:
    """All markings reachable from the given set via silent firings only."""
    silents = net.silent_ids()
    out = set(markings)
    stack = [Counter(dict(m)) for m in markings]
    while stack:
        current = stack.pop()
        for t in silents:
            if not is_enabled(net, current, t):
                continue
            nxt = fire(net, current, t)
            key = _marking_key(nxt)
            if key not in out:
                out.add(key)
                if len(out) > cap:
                    return out
                stack.append(nxt)
    return out


def _visible_enabled(net: PetriNet, markings: set[frozenset]) -> set[str]:
    labels = set()
    for key in markings:
        marking = Counter(dict(key))
        for tid, transition in net.transitions.items():
            if transition.label is not None and is_enabled(net, marking, tid):
                labels.add(transition.label)
    return labels


def etc_precision(log: EventLog, net: PetriNet) -> PrecisionResult:
    """Escaping-edges precision over the prefix automaton of the log.

    Each distinct activity prefix is one state, weighted by how many traces
    visit it. A state's allowed set is every visible label enabled after
    replaying the prefix (all matching transitions, with silent closure);
    escaping activities are allowed but never observed next. Trace-end
    states reflect nothing, so everything allowed there escapes. Prefixes
    that cannot be replayed are skipped and reported.
    """
    # Prefix automaton: state -> (weight, observed next activities).
    weights: Counter = Counter()
    children: dict[tuple[str, ...], set[str]] = {}
    for trace in log.traces:
        labels = tuple(e.activity for e in trace.events)
        for i in range(len(labels) + 1):
            prefix = labels[:i]
            weights[prefix] += 1
            children.setdefault(prefix, set())
            if i < len(labels):
                children[prefix].add(labels[i])

    by_label: dict[str, list[str]] = {}
    for tid, transition in net.transitions.items():
        if transition.label is not None:
            by_label.setdefault(transition.label, []).append(tid)

    result = PrecisionResult()
    state_markings: dict[tuple[str, ...], set[frozenset]] = {
        (): _closure(net, {_marking_key(net.initial)})
    }
    for prefix in sorted(weights, key=len):
        markings = state_markings.get(prefix)
        if markings is None:  # parent was unreplayable
            result.skipped_prefixes += 1
            continue
        allowed = _visible_enabled(net, markings)
        reflected = children[prefix]
        escaping = allowed - reflected
        result.allowed += weights[prefix] * len(allowed)
        result.escaping += weights[prefix] * len(escaping)
        for activity in reflected:
            successors: set[frozenset] = set()
            for key in markings:
                marking = Counter(dict(key))
                for tid in by_label.get(activity, ()):
                    if is_enabled(net, marking, tid):
                        successors.add(_marking_key(fire(net, marking, tid)))
            if successors:
                state_markings[prefix + (activity,)] = _closure(net, successors)
    return result
