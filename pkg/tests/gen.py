"""Seeded random generators shared by the test suite."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from flowmine.eventlog import Event, EventLog, build_log
from flowmine.extractor import ActInstRow, DetailRow
from flowmine.proctree import ProcessTree, leaf, loop, par, seq, xor
from flowmine.timestamps import utc_ms

T0 = datetime(2021, 3, 1, 8, 0, 0, tzinfo=timezone.utc)

ACTIVITY_POOL = [
    "Assign Approver", "Approve Invoice", "Review Invoice", "Prepare Transfer",
    "Archive", "Check Stock", "Notify", "Escalate", "Close",
    "Prüfung", "решение", "确认", "naïve-check", "α-step",
]
TYPE_POOL = ["userTask", "serviceTask", "task", "exclusiveGateway", "startEvent", "endEvent"]
RESOURCE_POOL = ["demo", "mary", "peter", "john", "ada", None]


def random_ts(rng: random.Random, spread_hours: int = 500) -> datetime:
    return utc_ms(T0 + timedelta(milliseconds=rng.randrange(spread_hours * 3600 * 1000)))


def random_attributes(rng: random.Random) -> dict:
    attrs = {}
    for name in rng.sample(["amount", "approved", "note", "retries", "due"], rng.randint(0, 3)):
        kind = rng.randrange(5)
        if kind == 0:
            attrs[name] = rng.choice(["ok", "高", "x,y", 'quo"te', "plain"])
        elif kind == 1:
            attrs[name] = rng.randint(-1000, 10_000)
        elif kind == 2:
            attrs[name] = round(rng.uniform(-5.0, 5000.0), 6)
        elif kind == 3:
            attrs[name] = rng.random() < 0.5
        else:
            attrs[name] = random_ts(rng)
    return attrs


def random_log(rng: random.Random, max_cases: int = 20, max_events: int = 12,
               with_attributes: bool = True, process_key: str = "proc") -> EventLog:
    pairs = []
    counter = 0
    for ci in range(rng.randint(0, max_cases)):
        for _ in range(rng.randint(1, max_events)):
            start = random_ts(rng)
            end = utc_ms(start + timedelta(milliseconds=rng.randrange(0, 3_600_000)))
            counter += 1
            pairs.append((f"case{ci}", Event(
                event_id=f"e{counter}",
                activity=rng.choice(ACTIVITY_POOL),
                activity_id=f"n{rng.randrange(1, 9)}",
                activity_type=rng.choice(TYPE_POOL),
                start=start,
                end=end,
                resource=rng.choice(RESOURCE_POOL),
                attributes=random_attributes(rng) if with_attributes else {},
            )))
    rng.shuffle(pairs)
    return build_log(pairs, process_key)


def log_from_sequences(seqs, process_key: str = "proc", minute_step: int = 1) -> EventLog:
    """Deterministic log whose traces follow the given activity sequences."""
    pairs = []
    counter = 0
    for ci, s in enumerate(seqs):
        t = T0
        for a in s:
            counter += 1
            start = utc_ms(t)
            end = utc_ms(t + timedelta(seconds=30))
            pairs.append((f"case{ci}", Event(
                event_id=f"e{counter}", activity=a, activity_id=a,
                activity_type="userTask", start=start, end=end)))
            t = t + timedelta(minutes=minute_step)
    return build_log(pairs, process_key)


# --- random process trees (rediscoverable class) ---------------------------

def tree_starts(tree: ProcessTree) -> set[str]:
    if tree.is_leaf:
        return set() if tree.label is None else {tree.label}
    if tree.operator == "sequence":
        return tree_starts(tree.children[0])
    if tree.operator == "loop":
        return tree_starts(tree.children[0])
    out: set[str] = set()
    for child in tree.children:
        out |= tree_starts(child)
    return out


def tree_ends(tree: ProcessTree) -> set[str]:
    if tree.is_leaf:
        return set() if tree.label is None else {tree.label}
    if tree.operator == "sequence":
        return tree_ends(tree.children[-1])
    if tree.operator == "loop":
        return tree_ends(tree.children[0])
    out: set[str] = set()
    for child in tree.children:
        out |= tree_ends(child)
    return out


def random_tree(rng: random.Random, max_depth: int = 3, max_alphabet: int = 8) -> ProcessTree:
    """Random block-structured tree with distinct labels and no silent leaves.

    Loop do-parts are constrained to have disjoint start/end activity sets,
    the class for which cut-based discovery can reproduce the language from
    a directly-follows-complete log.
    """
    size = rng.randint(2, max_alphabet)
    labels = [f"a{i}" for i in range(size)]
    rng.shuffle(labels)

    def build(pool: list[str], depth: int) -> ProcessTree:
        if len(pool) == 1 or depth == 0:
            if len(pool) == 1:
                return leaf(pool[0])
            # no depth left: a flat operator over the remaining labels
            op = rng.choice([seq, xor, par])
            return op(*(leaf(a) for a in pool))
        op_name = rng.choices(["sequence", "xor", "parallel", "loop"],
                              weights=[0.35, 0.30, 0.20, 0.15])[0]
        if op_name == "loop" and len(pool) < 3:
            op_name = rng.choice(["sequence", "xor", "parallel"])
        if op_name == "loop":
            split = rng.randint(2, len(pool) - 1)
            do_pool, redo_pool = pool[:split], pool[split:]
            # sequence-rooted do-part gives disjoint boundary activities
            cut_at = rng.randint(1, len(do_pool) - 1)
            do = seq(build(do_pool[:cut_at], depth - 1), build(do_pool[cut_at:], depth - 1))
            if tree_starts(do) & tree_ends(do):
                do = seq(leaf(do_pool[0]), build(do_pool[1:], depth - 1))
            redo = build(redo_pool, depth - 1)
            return loop(do, redo)
        n_children = rng.randint(2, min(4, len(pool)))
        cuts = sorted(rng.sample(range(1, len(pool)), n_children - 1))
        blocks = []
        last = 0
        for cut in cuts + [len(pool)]:
            blocks.append(pool[last:cut])
            last = cut
        children = [build(block, depth - 1) for block in blocks]
        ctor = {"sequence": seq, "xor": xor, "parallel": par}[op_name]
        return ctor(*children)

    if size == 1:
        return leaf(labels[0])
    return build(labels, max_depth)


# --- random history-table rows ---------------------------------------------

def random_actinst_rows(rng: random.Random, n_rows: int, tie_fraction: float = 0.15,
                        n_keys: int = 3, incomplete_fraction: float = 0.05) -> list[ActInstRow]:
    """Completed/ongoing history rows with a controlled share of end-time ties."""
    tie_pool = [random_ts(rng) for _ in range(max(1, n_rows // 50))]
    rows = []
    for i in range(n_rows):
        start = random_ts(rng)
        if rng.random() < tie_fraction:
            end = rng.choice(tie_pool)
            if end < start:
                start = utc_ms(end - timedelta(seconds=rng.randrange(1, 3600)))
        else:
            end = utc_ms(start + timedelta(milliseconds=rng.randrange(0, 7_200_000)))
        incomplete = rng.random() < incomplete_fraction
        rows.append(ActInstRow(
            id_=f"r{i}",
            proc_def_key_=f"proc{rng.randrange(n_keys)}",
            proc_inst_id_=f"inst{rng.randrange(max(1, n_rows // 8))}",
            act_id_=f"act{rng.randrange(12)}",
            act_name_=rng.choice(ACTIVITY_POOL),
            act_type_=rng.choice(TYPE_POOL),
            start_time_=start,
            end_time_=None if incomplete else end,
            assignee_=rng.choice(RESOURCE_POOL),
        ))
    return rows


def random_detail_rows(rng: random.Random, actinst: list[ActInstRow], per_row: float = 0.4) -> list[DetailRow]:
    details = []
    for row in actinst:
        while rng.random() < per_row:
            kind = rng.randrange(4)
            name = rng.choice(["amount", "approved", "note", "due"])
            if kind == 0:
                details.append(DetailRow(row.id_, name, "double", double_=round(rng.uniform(0, 9000), 3)))
            elif kind == 1:
                details.append(DetailRow(row.id_, name, "long", long_=rng.randint(0, 500)))
            elif kind == 2:
                details.append(DetailRow(row.id_, name, "string", text_=rng.choice(["yes", "no", "maybe"])))
            else:
                details.append(DetailRow(row.id_, name, "boolean", text_=rng.choice(["true", "false"])))
            if rng.random() < 0.7:
                break
    return details
