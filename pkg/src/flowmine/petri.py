"""Place/transition nets with the token-game semantics used for replay,
precision, simulation and language oracles. Nets are immutable after
construction; markings are plain Counters treated as values."""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

Marking = Counter  # place id -> token count (>= 1 for present keys)


class PetriNetError(Exception):
    pass


class IllegalFiringError(PetriNetError):
    pass


@dataclass(frozen=True)
class Transition:
    id: str
    label: Optional[str] = None  # None = silent

    @property
    def silent(self) -> bool:
        return self.label is None


@dataclass
class PetriNet:
    places: frozenset[str]
    transitions: dict[str, Transition]
    arcs: frozenset[tuple[str, str]]
    initial: Marking
    final: Marking
    _pre: dict[str, tuple[str, ...]] = field(init=False, repr=False)
    _post: dict[str, tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for src, dst in self.arcs:
            src_place, dst_place = src in self.places, dst in self.places
            src_trans, dst_trans = src in self.transitions, dst in self.transitions
            if not ((src_place and dst_trans) or (src_trans and dst_place)):
                raise PetriNetError(f"arc ({src!r}, {dst!r}) must connect a place and a transition")
        for marking, name in ((self.initial, "initial"), (self.final, "final")):
            for place in marking:
                if place not in self.places:
                    raise PetriNetError(f"{name} marking over undeclared place {place!r}")
        pre: dict[str, list[str]] = {t: [] for t in self.transitions}
        post: dict[str, list[str]] = {t: [] for t in self.transitions}
        for src, dst in sorted(self.arcs):
            if dst in self.transitions:
                pre[dst].append(src)
            else:
                post[src].append(dst)
        self._pre = {t: tuple(v) for t, v in pre.items()}
        self._post = {t: tuple(v) for t, v in post.items()}

    def pre(self, t: str) -> tuple[str, ...]:
        return self._pre[t]

    def post(self, t: str) -> tuple[str, ...]:
        return self._post[t]

    def silent_ids(self) -> list[str]:
        return sorted(t for t, tr in self.transitions.items() if tr.silent)

    def labels(self) -> set[str]:
        return {tr.label for tr in self.transitions.values() if tr.label is not None}


def make_net(places: Iterable[str],
             transitions: Iterable[tuple[str, Optional[str]]],
             arcs: Iterable[tuple[str, str]],
             initial: dict[str, int],
             final: dict[str, int]) -> PetriNet:
    return PetriNet(
        places=frozenset(places),
        transitions={tid: Transition(tid, label) for tid, label in transitions},
        arcs=frozenset(arcs),
        initial=Counter(initial),
        final=Counter(final),
    )


def enabled(net: PetriNet, marking: Marking) -> set[str]:
    """Transitions whose every input place holds at least one token."""
    out = set()
    for t in net.transitions:
        if all(marking[p] >= 1 for p in net.pre(t)):
            out.add(t)
    return out


def is_enabled(net: PetriNet, marking: Marking, t: str) -> bool:
    return all(marking[p] >= 1 for p in net.pre(t))


def fire(net: PetriNet, marking: Marking, t: str) -> Marking:
    """Fire an enabled transition, returning the successor marking."""
    if t not in net.transitions:
        raise IllegalFiringError(f"unknown transition {t!r}")
    if not is_enabled(net, marking, t):
        raise IllegalFiringError(f"transition {t!r} not enabled")
    new = Counter(marking)
    for p in net.pre(t):
        new[p] -= 1
        if new[p] == 0:
            del new[p]
    for p in net.post(t):
        new[p] += 1
    return new


def _marking_key(marking: Marking) -> frozenset[tuple[str, int]]:
    return frozenset(marking.items())


@dataclass
class SimulationResult:
    traces: list[tuple[str, ...]]
    abandoned: int = 0


def simulate(net: PetriNet, max_traces: int, max_len: int, seed: int) -> SimulationResult:
    """Random walks from the initial to the final marking.

    Silent transitions fire but contribute nothing to the recorded label
    sequence. Walks whose visible length exceeds ``max_len`` (or that hit a
    step cap or dead marking) are abandoned and counted. Deterministic for
    a fixed seed.
    """
    rng = random.Random(seed)
    step_cap = 10 * (max_len + 1) + 100
    result = SimulationResult(traces=[])
    final_key = _marking_key(net.final)
    for _ in range(max_traces):
        marking = Counter(net.initial)
        labels: list[str] = []
        steps = 0
        while _marking_key(marking) != final_key:
            choices = sorted(enabled(net, marking))
            if not choices or steps >= step_cap or len(labels) > max_len:
                labels = []
                result.abandoned += 1
                break
            t = choices[rng.randrange(len(choices))]
            marking = fire(net, marking, t)
            label = net.transitions[t].label
            if label is not None:
                labels.append(label)
            steps += 1
        else:
            if len(labels) <= max_len:
                result.traces.append(tuple(labels))
            else:
                result.abandoned += 1
    return result


def bounded_language(net: PetriNet, max_len: int, max_states: int = 2_000_000) -> set[tuple[str, ...]]:
    """All visible label sequences of length <= max_len that reach the final marking."""
    final_key = _marking_key(net.final)
    start = (_marking_key(net.initial), ())
    seen = {start}
    queue = deque([(Counter(net.initial), ())])
    words: set[tuple[str, ...]] = set()
    while queue:
        marking, word = queue.popleft()
        if _marking_key(marking) == final_key:
            words.add(word)
        for t in net.transitions:
            if not is_enabled(net, marking, t):
                continue
            label = net.transitions[t].label
            new_word = word if label is None else word + (label,)
            if len(new_word) > max_len:
                continue
            new_marking = fire(net, marking, t)
            key = (_marking_key(new_marking), new_word)
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > max_states:
                raise PetriNetError(f"state space exceeds {max_states} states")
            queue.append((new_marking, new_word))
    return words


def reachable_markings(net: PetriNet, max_states: int = 200_000) -> dict[frozenset, list[tuple[str, frozenset]]]:
    """Reachability graph: marking key -> [(transition, successor key)]."""
    start = _marking_key(net.initial)
    graph: dict[frozenset, list[tuple[str, frozenset]]] = {}
    queue = deque([Counter(net.initial)])
    seen = {start}
    while queue:
        marking = queue.popleft()
        key = _marking_key(marking)
        edges = []
        for t in sorted(net.transitions):
            if is_enabled(net, marking, t):
                nxt = fire(net, marking, t)
                nkey = _marking_key(nxt)
                edges.append((t, nkey))
                if nkey not in seen:
                    seen.add(nkey)
                    if len(seen) > max_states:
                        raise PetriNetError(f"reachability graph exceeds {max_states} markings")
                    queue.append(nxt)
        graph[key] = edges
    return graph


def check_workflow_net(net: PetriNet) -> list[str]:
    """Structural workflow-net check; returns a list of problems (empty = ok)."""
    problems = []
    incoming: dict[str, int] = {p: 0 for p in net.places}
    outgoing: dict[str, int] = {p: 0 for p in net.places}
    for src, dst in net.arcs:
        if dst in incoming:
            incoming[dst] += 1
        if src in outgoing:
            outgoing[src] += 1
    sources = sorted(p for p in net.places if incoming[p] == 0)
    sinks = sorted(p for p in net.places if outgoing[p] == 0)
    if len(sources) != 1:
        problems.append(f"expected one source place, found {sources}")
    if len(sinks) != 1:
        problems.append(f"expected one sink place, found {sinks}")
    if problems:
        return problems
    source, sink = sources[0], sinks[0]

    succ: dict[str, set[str]] = {}
    pred: dict[str, set[str]] = {}
    for src, dst in net.arcs:
        succ.setdefault(src, set()).add(dst)
        pred.setdefault(dst, set()).add(src)

    def closure(start: str, adj: dict[str, set[str]]) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adj.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    from_source = closure(source, succ)
    to_sink = closure(sink, pred)
    all_nodes = set(net.places) | set(net.transitions)
    stranded = sorted(all_nodes - (from_source & to_sink))
    if stranded:
        problems.append(f"nodes not on a source-to-sink path: {stranded}")
    return problems
