"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines; every expected value is either hand-derived or produced by the
independent oracles in ``oracles.py`` / ``bpmn_sim.py``.
"""

import json
import random
import shutil
import time
from collections import Counter
from pathlib import Path

import jsonschema
import pytest
from fastapi.testclient import TestClient

from flowmine.bpmn import UnsupportedConstruct, bpmn_to_petri, parse_bpmn
from flowmine.cli import main as cli_main
from flowmine.conformance import etc_precision, replay_fitness
from flowmine.csvlog import export_csv, import_csv
from flowmine.discovery import discover_dfg, mine_tree
from flowmine.analytics import decision_mining
from flowmine.eventlog import Event, build_log
from flowmine.extractor import ListSource, WatermarkState, incremental_extract
from flowmine.petri import bounded_language, check_workflow_net, simulate
from flowmine.proctree import format_tree, leaf, loop, seq, tau, tree_to_petri, xor
from flowmine.service import create_app
from flowmine.timestamps import utc_ms
from flowmine.xes import export_xes, import_xes

from bpmn_sim import bpmn_language
from gen import (
    T0,
    log_from_sequences,
    random_actinst_rows,
    random_detail_rows,
    random_log,
    random_tree,
)
from oracles import (
    brute_force_dfg,
    brute_force_handover,
    brute_force_similar_activities,
    brute_force_working_together,
    exhaustive_best_threshold,
    naive_precision,
)

FIXTURES = Path(__file__).parent / "fixtures"


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {name}: {status}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert ok, line


def test_incremental_full_equivalence():
    """200 randomized row sets, arbitrary batch partitions, exact id multisets."""
    rng = random.Random(1001)
    start_time = time.monotonic()
    tied_rows = 0
    total_completed = 0
    mismatches = 0
    for case in range(200):
        if case < 150:
            n = rng.randint(100, 1000)
        elif case < 190:
            n = rng.randint(1000, 3000)
        else:
            n = 5000
        rows = random_actinst_rows(rng, n, tie_fraction=0.2)
        details = random_detail_rows(rng, rows, per_row=0.1)

        completed = [r for r in rows if r.end_time_ is not None]
        total_completed += len(completed)
        per_key_end = Counter((r.proc_def_key_, r.end_time_) for r in completed)
        tied_rows += sum(c for c in per_key_end.values() if c >= 2)

        full = incremental_extract(ListSource(rows, details), WatermarkState())
        full_ids = Counter(e.event_id for lg in full.logs.values() for e in lg.iter_events())

        completed.sort(key=lambda r: r.end_time_)
        ongoing = [r for r in rows if r.end_time_ is None]
        n_batches = rng.randint(1, 6)
        cuts = sorted(rng.sample(range(len(completed) + 1), min(n_batches, len(completed) + 1)))
        state = WatermarkState()
        seen: Counter = Counter()
        for cut in cuts + [len(completed)]:
            batch = completed[:cut] + ongoing
            result = incremental_extract(ListSource(batch, details), state)
            state = result.state
            seen += Counter(e.event_id for lg in result.logs.values() for e in lg.iter_events())
        if seen != full_ids or (seen and max(seen.values()) != 1):
            mismatches += 1
    elapsed = time.monotonic() - start_time
    tie_share = tied_rows / total_completed
    report("incremental-full-equivalence",
           mismatches == 0 and tie_share >= 0.10 and elapsed < 60.0,
           f"{elapsed:.1f}s, tie share {tie_share:.0%}")


def test_round_trip_identity():
    rng = random.Random(1002)
    failures = 0
    for _ in range(100):
        log = random_log(rng)
        if import_xes(export_xes(log)) != log:
            failures += 1
        if import_csv(export_csv(log), process_key=log.process_key) != log:
            failures += 1
    report("round-trip-identity", failures == 0)


def test_dfg_oracle_equivalence():
    rng = random.Random(1003)
    failures = 0
    for _ in range(100):
        log = random_log(rng, max_cases=200, max_events=30, with_attributes=False)
        dfg = discover_dfg(log)
        activities, edges, mean_gaps, starts, ends = brute_force_dfg(log)
        ok = (dfg.activities == activities
              and {p: e.count for p, e in dfg.edges.items()} == dict(edges)
              and dfg.start_activities == starts
              and dfg.end_activities == ends
              and all(abs(dfg.edges[p].mean_gap_seconds - g) < 1e-9 for p, g in mean_gaps.items()))
        if not ok:
            failures += 1
    report("dfg-oracle-equivalence", failures == 0)


@pytest.fixture(scope="module")
def tree_corpus():
    rng = random.Random(1004)
    return [random_tree(rng, max_depth=3, max_alphabet=8) for _ in range(100)]


def test_im_fitness_guarantee(tree_corpus):
    rng = random.Random(1005)
    failures = 0
    slowest = 0.0
    for tree in tree_corpus:
        t0 = time.monotonic()
        net = tree_to_petri(tree)
        sim = simulate(net, max_traces=500, max_len=40, seed=rng.randrange(10**6))
        mined = mine_tree(sim.traces)
        mined_net = tree_to_petri(mined)
        result = replay_fitness(log_from_sequences(sim.traces), mined_net)
        elapsed = time.monotonic() - t0
        slowest = max(slowest, elapsed)
        if result.fitness != 1.0 or elapsed >= 2.0:
            failures += 1
    report("im-fitness-guarantee", failures == 0, f"slowest tree {slowest:.2f}s")


def test_rediscovery_language_equivalence(tree_corpus):
    failures = []
    for i, tree in enumerate(tree_corpus):
        net = tree_to_petri(tree)
        language = bounded_language(net, 16)
        mined = mine_tree(sorted(language))
        mined_language = bounded_language(tree_to_petri(mined), 16)
        if mined_language != language:
            failures.append((i, format_tree(tree), format_tree(mined)))
    report("rediscovery-language-equivalence", not failures,
           f"{len(failures)} failures" if failures else "100 trees")


def test_worked_conformance_values():
    # hand-derived from the counting convention: <b> on a->b
    net = tree_to_petri(seq(leaf("a"), leaf("b")))
    fit = replay_fitness(log_from_sequences([("b",)]), net)
    fitness_ok = (fit.fitness == 0.5 and fit.missing == 1 and fit.remaining == 1
                  and fit.consumed == 2 and fit.produced == 2)

    flower = tree_to_petri(loop(tau(), xor(leaf("a"), leaf("b"))))
    log = log_from_sequences([("a", "b")])
    precision = etc_precision(log, flower)
    oracle = naive_precision(log, flower)
    precision_ok = (abs(precision.precision - 1.0 / 3.0) < 1e-9
                    and abs(oracle - 1.0 / 3.0) < 1e-9
                    and precision.escaping == 4 and precision.allowed == 6)
    report("worked-conformance-values", fitness_ok and precision_ok)


def test_bpmn_petri_semantics():
    ok = True
    for name in ("linear.bpmn", "xor_diamond.bpmn", "and_diamond.bpmn",
                 "nested.bpmn", "loopback.bpmn"):
        graph = parse_bpmn((FIXTURES / "bpmn" / name).read_bytes())
        net = bpmn_to_petri(graph)
        if check_workflow_net(net) != []:
            ok = False
        if bounded_language(net, 20) != bpmn_language(graph, 20):
            ok = False
    try:
        bpmn_to_petri(parse_bpmn((FIXTURES / "bpmn" / "inclusive.bpmn").read_bytes()))
        ok = False
    except UnsupportedConstruct:
        pass
    report("bpmn-petri-semantics", ok)


def test_sna_oracle_equivalence():
    from flowmine.analytics import handover_of_work, similar_activities, working_together
    rng = random.Random(1006)
    failures = 0
    for _ in range(100):
        log = random_log(rng, with_attributes=False)
        handover = handover_of_work(log)
        together = working_together(log)
        similar = similar_activities(log)
        expected_handover = brute_force_handover(log)
        expected_together = brute_force_working_together(log)
        expected_similar = brute_force_similar_activities(log)
        for matrix, expected, exact in ((handover, expected_handover, True),
                                        (together, expected_together, True),
                                        (similar, expected_similar, False)):
            for i, r1 in enumerate(matrix.resources):
                for j, r2 in enumerate(matrix.resources):
                    want = expected.get((r1, r2), 0)
                    got = matrix.values[i][j]
                    if exact and got != want:
                        failures += 1
                    if not exact and abs(got - want) > 1e-9:
                        failures += 1
    report("sna-oracle-equivalence", failures == 0)


GATEWAY_XML = """<?xml version="1.0"?>
<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL">
  <process id="p">
    <startEvent id="s" name="s"/>
    <userTask id="t1" name="enter"/>
    <exclusiveGateway id="g1" name="route"/>
    <userTask id="b" name="big"/>
    <userTask id="c" name="small"/>
    <endEvent id="e1" name="e1"/>
    <endEvent id="e2" name="e2"/>
    <sequenceFlow id="f0" sourceRef="s" targetRef="t1"/>
    <sequenceFlow id="f1" sourceRef="t1" targetRef="g1"/>
    <sequenceFlow id="to_b" sourceRef="g1" targetRef="b"/>
    <sequenceFlow id="to_c" sourceRef="g1" targetRef="c"/>
    <sequenceFlow id="f4" sourceRef="b" targetRef="e1"/>
    <sequenceFlow id="f5" sourceRef="c" targetRef="e2"/>
  </process>
</definitions>"""


def _gateway_log(rows):
    from datetime import timedelta
    pairs = []
    counter = 0
    for ci, (amount, target) in enumerate(rows):
        events = [("s", "startEvent", {}), ("t1", "userTask", {"amount": amount}),
                  ("g1", "exclusiveGateway", {}), (target, "userTask", {})]
        for ei, (act_id, act_type, attrs) in enumerate(events):
            counter += 1
            start = utc_ms(T0 + timedelta(minutes=ei))
            pairs.append((f"c{ci}", Event(
                event_id=f"e{counter}", activity=act_id, activity_id=act_id,
                activity_type=act_type, start=start, end=start, attributes=dict(attrs))))
    return build_log(pairs, "p")


def test_decision_mining_recovery():
    graph = parse_bpmn(GATEWAY_XML)
    rng = random.Random(1007)
    recovered = 0
    for _ in range(100):
        threshold = rng.uniform(100, 900)
        rows = [(amount, "c" if amount < threshold else "b")
                for amount in (rng.uniform(0, 1000) for _ in range(50))]
        if len({t for _, t in rows}) < 2:
            recovered += 1  # degenerate draw: nothing to recover
            continue
        guards = decision_mining(_gateway_log(rows), graph)
        if len(guards) == 1 and guards[0].accuracy == 1.0:
            values = [a for a, _ in rows]
            targets = [t for _, t in rows]
            best_acc, _ = exhaustive_best_threshold(values, targets)
            if best_acc == 1.0:
                recovered += 1
    suppressed = 0
    for _ in range(100):
        rows = [(rng.uniform(0, 1000), rng.choice(["b", "c"])) for _ in range(50)]
        if not decision_mining(_gateway_log(rows), graph):
            suppressed += 1
    report("decision-mining-recovery", recovered >= 95 and suppressed >= 95,
           f"recovered {recovered}/100, suppressed {suppressed}/100")


@pytest.fixture(scope="module")
def served(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    source = root / "source"
    shutil.copytree(FIXTURES / "camunda", source)
    models = root / "models"
    models.mkdir()
    shutil.copy(FIXTURES / "models" / "invoice.bpmn", models / "invoice.bpmn")
    (root / "config.json").write_text(json.dumps({
        "source": {"csv_dir": "source"},
        "models": {"dir": "models"},
        "state_path": "state.json",
        "output_dir": "out",
    }))
    assert cli_main(["--config", str(root / "config.json"), "extract"]) == 0
    return TestClient(create_app(root / "out"))


def _schema(name: str) -> dict:
    path = Path(__file__).parent.parent / "src" / "flowmine" / "schemas" / f"{name}.json"
    return json.loads(path.read_text())


def test_api_schema_validity(served):
    client = served
    ok = True

    def check(response, schema_name, status=200):
        nonlocal ok
        if response.status_code != status:
            ok = False
            return
        try:
            jsonschema.validate(response.json(), _schema(schema_name))
        except jsonschema.ValidationError as exc:
            print(f"schema violation in {schema_name}: {exc.message}")
            ok = False

    check(client.get("/api/processes"), "processes")
    check(client.get("/api/processes/invoice/dfg"), "dfg")
    check(client.get("/api/processes/invoice/dfg", params={"types": "task"}), "dfg")
    check(client.get("/api/processes/invoice/cases", params={"top": "5"}), "cases")
    case_id = client.get("/api/processes/invoice/cases").json()[0]["case_id"]
    check(client.get(f"/api/processes/invoice/cases/{case_id}"), "case_detail")
    for metric in ("handover", "working_together", "similar_activities"):
        check(client.get("/api/processes/invoice/sna", params={"metric": metric}), "sna")
    check(client.get("/api/processes/invoice/decoration"), "decoration")
    model = client.get("/api/processes/invoice/model")
    if model.status_code != 200 or not model.headers["content-type"].startswith("application/xml"):
        ok = False

    check(client.get("/api/processes/ghost/dfg"), "error", status=404)
    check(client.get("/api/processes/invoice/dfg", params={"types": "zz"}), "error", status=400)
    check(client.get("/api/processes/invoice/sna", params={"metric": "zz"}), "error", status=400)
    check(client.get("/api/processes/invoice/cases", params={"top": "-1"}), "error", status=400)
    report("api-schema-validity", ok)
