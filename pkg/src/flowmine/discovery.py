"""Directly-follows graphs and inductive process-tree discovery.

The miner recursively partitions the log's directly-follows graph, trying
exclusive-choice, sequence, parallel and loop cuts in that fixed order and
falling back to a flower model when no cut applies. Every found cut is
re-verified against its defining conditions before use, which keeps the
perfect-fitness guarantee of the approach intact for arbitrary input logs.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .eventlog import EventLog
from .proctree import ProcessTree, leaf, loop, par, seq, tau, xor

XOR_CUT = "xor"
SEQUENCE_CUT = "sequence"
PARALLEL_CUT = "parallel"
LOOP_CUT = "loop"


@dataclass
class DfgEdge:
    count: int = 0
    total_gap_seconds: float = 0.0

    @property
    def mean_gap_seconds(self) -> float:
        return self.total_gap_seconds / self.count if self.count else 0.0


@dataclass
class Dfg:
    activities: Counter = field(default_factory=Counter)
    edges: dict[tuple[str, str], DfgEdge] = field(default_factory=dict)
    start_activities: Counter = field(default_factory=Counter)
    end_activities: Counter = field(default_factory=Counter)

    @property
    def alphabet(self) -> set[str]:
        return set(self.activities)

    def edge_count(self, a: str, b: str) -> int:
        edge = self.edges.get((a, b))
        return edge.count if edge else 0

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in self.edges

    def to_json(self) -> dict:
        return {
            "activities": {a: int(c) for a, c in sorted(self.activities.items())},
            "edges": [
                {"from": a, "to": b, "count": edge.count,
                 "mean_gap": edge.mean_gap_seconds}
                for (a, b), edge in sorted(self.edges.items())
            ],
            "start": {a: int(c) for a, c in sorted(self.start_activities.items())},
            "end": {a: int(c) for a, c in sorted(self.end_activities.items())},
        }


def discover_dfg(log: EventLog, min_edge_count: int = 0) -> Dfg:
    """Count activities, adjacent pairs, and first/last activities per trace.

    The edge gap is ``max(0, next.start - previous.end)``; overlapping
    interval events therefore contribute a zero gap. ``min_edge_count``
    optionally drops infrequent edges from the result.
    """
    dfg = Dfg()
    for trace in log.traces:
        events = trace.events
        if not events:
            continue
        dfg.start_activities[events[0].activity] += 1
        dfg.end_activities[events[-1].activity] += 1
        for event in events:
            dfg.activities[event.activity] += 1
        for prev, nxt in zip(events, events[1:]):
            edge = dfg.edges.setdefault((prev.activity, nxt.activity), DfgEdge())
            edge.count += 1
            edge.total_gap_seconds += max(0.0, (nxt.start - prev.end).total_seconds())
    if min_edge_count > 0:
        dfg.edges = {k: e for k, e in dfg.edges.items() if e.count >= min_edge_count}
    return dfg


def dfg_from_sequences(seqs: list[tuple[str, ...]]) -> Dfg:
    dfg = Dfg()
    for s in seqs:
        if not s:
            continue
        dfg.start_activities[s[0]] += 1
        dfg.end_activities[s[-1]] += 1
        for a in s:
            dfg.activities[a] += 1
        for a, b in zip(s, s[1:]):
            dfg.edges.setdefault((a, b), DfgEdge()).count += 1
    return dfg


@dataclass(frozen=True)
class Cut:
    kind: str
    partition: tuple[frozenset[str], ...]


def _sorted_blocks(blocks: list[set[str]]) -> tuple[frozenset[str], ...]:
    return tuple(frozenset(b) for b in sorted(blocks, key=lambda b: min(b)))


def _undirected_components(alphabet: set[str], pairs: set[tuple[str, str]]) -> list[set[str]]:
    adjacency: dict[str, set[str]] = {a: set() for a in alphabet}
    for a, b in pairs:
        if a in adjacency and b in adjacency:
            adjacency[a].add(b)
            adjacency[b].add(a)
    components = []
    remaining = set(alphabet)
    while remaining:
        start = min(remaining)
        comp = {start}
        stack = [start]
        while stack:
            for nxt in adjacency[stack.pop()]:
                if nxt not in comp:
                    comp.add(nxt)
                    stack.append(nxt)
        components.append(comp)
        remaining -= comp
    return components


def _reachability(alphabet: set[str], dfg: Dfg) -> dict[str, set[str]]:
    succ: dict[str, set[str]] = {a: set() for a in alphabet}
    for a, b in dfg.edges:
        succ[a].add(b)
    reach: dict[str, set[str]] = {}
    for a in alphabet:
        seen: set[str] = set()
        stack = list(succ[a])
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(succ[node])
        reach[a] = seen
    return reach


def _find_xor_cut(dfg: Dfg, alphabet: set[str]) -> Cut | None:
    components = _undirected_components(alphabet, set(dfg.edges))
    if len(components) < 2:
        return None
    return Cut(XOR_CUT, _sorted_blocks(components))


def _find_sequence_cut(dfg: Dfg, alphabet: set[str]) -> Cut | None:
    reach = _reachability(alphabet, dfg)

    # Strongly connected components by mutual reachability, then merge
    # pairwise-unreachable groups (they cannot be ordered, so they share a
    # block); what remains must verify as a total order.
    parent = {a: a for a in alphabet}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    items = sorted(alphabet)
    for i, a in enumerate(items):
        for b in items[i + 1:]:
            a_to_b = b in reach[a]
            b_to_a = a in reach[b]
            if a_to_b == b_to_a:  # mutual or neither: same block
                union(a, b)

    groups: dict[str, set[str]] = defaultdict(set)
    for a in items:
        groups[find(a)].add(a)
    blocks = list(groups.values())
    if len(blocks) < 2:
        return None

    def reaches(block_a: set[str], block_b: set[str]) -> bool:
        return any(b in reach[a] for a in block_a for b in block_b)

    scores = {i: sum(1 for j, other in enumerate(blocks) if j != i and reaches(block, other))
              for i, block in enumerate(blocks)}
    blocks = [block for _, block in sorted(enumerate(blocks), key=lambda t: scores[t[0]], reverse=True)]
    for i, block_a in enumerate(blocks):
        for block_b in blocks[i + 1:]:
            for a in block_a:
                for b in block_b:
                    if b not in reach[a] or a in reach[b]:
                        return None
    return Cut(SEQUENCE_CUT, tuple(frozenset(b) for b in blocks))


def _find_parallel_cut(dfg: Dfg, alphabet: set[str]) -> Cut | None:
    non_bidirectional = set()
    items = sorted(alphabet)
    for i, a in enumerate(items):
        for b in items[i + 1:]:
            if not (dfg.has_edge(a, b) and dfg.has_edge(b, a)):
                non_bidirectional.add((a, b))
    components = _undirected_components(alphabet, non_bidirectional)
    if len(components) < 2:
        return None
    starts, ends = set(dfg.start_activities), set(dfg.end_activities)
    for comp in components:
        if not (comp & starts) or not (comp & ends):
            return None
    return Cut(PARALLEL_CUT, _sorted_blocks(components))


def _find_loop_cut(dfg: Dfg, alphabet: set[str]) -> Cut | None:
    starts, ends = set(dfg.start_activities), set(dfg.end_activities)
    body = set(starts | ends)
    edges = set(dfg.edges)

    while True:
        rest = alphabet - body
        if not rest:
            return None
        components = _undirected_components(rest, edges)
        demoted = set()
        for comp in components:
            entries = {b for a, b in edges if a in body and b in comp}
            exits = {a for a, b in edges if a in comp and b in body}
            ok = True
            # Entries into a redo part must come only from end activities,
            # exits must lead only to start activities, and those boundary
            # connections must be uniform over all ends/starts.
            for a, b in edges:
                if a in body and b in comp and a not in ends:
                    ok = False
                if a in comp and b in body and b not in starts:
                    ok = False
            if ok:
                for b in entries:
                    if any((e, b) not in edges for e in ends):
                        ok = False
                        break
            if ok:
                for a in exits:
                    if any((a, s) not in edges for s in starts):
                        ok = False
                        break
            if not ok:
                demoted |= comp
        if not demoted:
            redo_blocks = components
            break
        body |= demoted

    if not redo_blocks:
        return None
    ordered = [body] + sorted(redo_blocks, key=min)
    return Cut(LOOP_CUT, tuple(frozenset(b) for b in ordered))


def find_cut(dfg: Dfg) -> Cut | None:
    """First applicable maximal cut in the fixed order xor, sequence, parallel, loop."""
    alphabet = dfg.alphabet
    if not alphabet:
        return None
    for finder in (_find_xor_cut, _find_sequence_cut, _find_parallel_cut, _find_loop_cut):
        cut = finder(dfg, alphabet)
        if cut is not None:
            return cut
    return None


def _split_xor(seqs: list[tuple[str, ...]], blocks) -> list[list[tuple[str, ...]]]:
    index = {a: i for i, block in enumerate(blocks) for a in block}
    sublogs: list[list[tuple[str, ...]]] = [[] for _ in blocks]
    for s in seqs:
        votes = Counter(index[a] for a in s if a in index)
        target = min(k for k, v in votes.items() if v == max(votes.values()))
        sublogs[target].append(tuple(a for a in s if index.get(a) == target))
    return sublogs


def _split_sequence(seqs: list[tuple[str, ...]], blocks) -> list[list[tuple[str, ...]]]:
    index = {a: i for i, block in enumerate(blocks) for a in block}
    sublogs: list[list[tuple[str, ...]]] = [[] for _ in blocks]
    for s in seqs:
        segments: list[list[str]] = [[] for _ in blocks]
        current = 0
        for a in s:
            i = index.get(a, current)
            if i > current:
                current = i
            segments[current].append(a)
        for i, segment in enumerate(segments):
            sublogs[i].append(tuple(segment))
    return sublogs


def _split_parallel(seqs: list[tuple[str, ...]], blocks) -> list[list[tuple[str, ...]]]:
    index = {a: i for i, block in enumerate(blocks) for a in block}
    sublogs: list[list[tuple[str, ...]]] = [[] for _ in blocks]
    for s in seqs:
        projections: list[list[str]] = [[] for _ in blocks]
        for a in s:
            if a in index:
                projections[index[a]].append(a)
        for i, proj in enumerate(projections):
            sublogs[i].append(tuple(proj))
    return sublogs


def _split_loop(seqs: list[tuple[str, ...]], blocks) -> list[list[tuple[str, ...]]]:
    index = {a: i for i, block in enumerate(blocks) for a in block}
    sublogs: list[list[tuple[str, ...]]] = [[] for _ in blocks]
    for s in seqs:
        segment: list[str] = []
        segment_block: int | None = None
        for a in s:
            i = index.get(a, 0)
            if segment_block is None:
                if i != 0:
                    # Trace opens inside a redo part; pad with an empty
                    # body round so the loop semantics still fit.
                    sublogs[0].append(())
                segment_block = i
                segment.append(a)
                continue
            if i == segment_block:
                segment.append(a)
                continue
            sublogs[segment_block].append(tuple(segment))
            segment = [a]
            segment_block = i
        if segment_block is not None:
            sublogs[segment_block].append(tuple(segment))
            if segment_block != 0:
                # ... and symmetrically when it ends inside a redo part.
                sublogs[0].append(())
    return sublogs


_SPLITTERS = {
    XOR_CUT: _split_xor,
    SEQUENCE_CUT: _split_sequence,
    PARALLEL_CUT: _split_parallel,
    LOOP_CUT: _split_loop,
}


def mine_tree(seqs: list[tuple[str, ...]]) -> ProcessTree:
    """Inductive discovery over plain activity sequences."""
    if not seqs:
        return tau()
    nonempty = [s for s in seqs if s]
    if not nonempty:
        return tau()
    if len(nonempty) < len(seqs):
        return xor(tau(), mine_tree(nonempty))
    alphabet = {a for s in nonempty for a in s}
    if len(alphabet) == 1:
        activity = next(iter(alphabet))
        if all(len(s) == 1 for s in nonempty):
            return leaf(activity)
        return loop(leaf(activity), tau())
    dfg = dfg_from_sequences(nonempty)
    cut = find_cut(dfg)
    if cut is None:
        return loop(tau(), xor(*(leaf(a) for a in sorted(alphabet))))
    sublogs = _SPLITTERS[cut.kind](nonempty, cut.partition)
    children = [mine_tree(sublog) for sublog in sublogs]
    if cut.kind == XOR_CUT:
        return xor(*children)
    if cut.kind == SEQUENCE_CUT:
        return seq(*children)
    if cut.kind == PARALLEL_CUT:
        return par(*children)
    redo = children[1] if len(children) == 2 else xor(*children[1:])
    return loop(children[0], redo)


def inductive_miner(log: EventLog) -> ProcessTree:
    """Discover a process tree from an event log."""
    return mine_tree(log.activity_sequences())
