"""Command-line interface: extraction, discovery, conformance, analytics, serving."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from . import analytics
from .bpmn import GATEWAY_KINDS, bpmn_to_petri, fetch_models_rest, parse_bpmn
from .config import Config, ConfigError, load_config
from .conformance import etc_precision, replay_fitness
from .discovery import discover_dfg, inductive_miner
from .eventlog import EventLog, filter_activity_types
from .extractor import (
    CsvDirectorySource,
    ExtractionError,
    SourceUnreachableError,
    SqlSource,
    WatermarkState,
    incremental_extract,
)
from .petri import PetriNet
from .proctree import format_tree, parse_tree, tree_to_petri
from .store import ArtifactStore, StoreError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN_PROCESS = 2
EXIT_SOURCE_UNREACHABLE = 3


class CliError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_ERROR):
        super().__init__(message)
        self.exit_code = exit_code


def _open_source(config: Config):
    if config.csv_dir is not None:
        return CsvDirectorySource(config.csv_dir)
    url = config.db_url or ""
    if url.startswith("sqlite:///"):
        import sqlite3
        try:
            path = url[len("sqlite:///"):]
            connection = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
        except sqlite3.Error as exc:
            raise CliError(f"cannot open database {url}: {exc}", EXIT_SOURCE_UNREACHABLE) from exc
        return SqlSource(connection)
    raise CliError(
        f"unsupported db_url {url!r}; pass a sqlite:/// URL or use SqlSource programmatically "
        f"with your own DB-API connection", EXIT_SOURCE_UNREACHABLE)


def _load_store_log(config: Config, key: str, apply_filter: bool = True) -> EventLog:
    store = ArtifactStore(config.output_dir)
    if not store.has_process(key):
        known = ", ".join(store.process_keys()) or "(none)"
        raise CliError(f"unknown process key {key!r}; known keys: {known}", EXIT_UNKNOWN_PROCESS)
    event_log = store.load_log(key)
    if apply_filter and config.activity_type_filter:
        event_log = filter_activity_types(event_log, config.activity_type_filter)
    return event_log


def _net_from_model_file(path: Path) -> PetriNet:
    if path.suffix == ".tree":
        return tree_to_petri(parse_tree(path.read_text(encoding="utf-8")))
    return bpmn_to_petri(parse_bpmn(path.read_bytes()))


def _net_json(net: PetriNet) -> dict:
    return {
        "places": sorted(net.places),
        "transitions": [
            {"id": tid, "label": net.transitions[tid].label}
            for tid in sorted(net.transitions)
        ],
        "arcs": sorted([list(arc) for arc in net.arcs]),
        "initial": dict(sorted(net.initial.items())),
        "final": dict(sorted(net.final.items())),
    }


def cmd_extract(config: Config, args) -> int:
    with _watermark_lock(config.state_path):
        source = _open_source(config)
        try:
            state = WatermarkState.load(config.state_path)
        except ExtractionError as exc:
            raise CliError(f"watermark state unusable: {exc}") from exc
        try:
            result = incremental_extract(source, state)
        except SourceUnreachableError as exc:
            raise CliError(str(exc), EXIT_SOURCE_UNREACHABLE) from exc

        store = ArtifactStore(config.output_dir)
        for key in sorted(result.logs):
            merged = store.append_delta(result.logs[key])
            print(f"{key}: {result.logs[key].n_events} new events "
                  f"({len(merged.traces)} cases, {merged.n_events} events total)")
        if not result.logs:
            print("0 new events")
        result.state.save(config.state_path)
        if result.skipped_incomplete:
            print(f"skipped {result.skipped_incomplete} ongoing (incomplete) rows")
        if result.rejected_duplicates:
            print(f"rejected {result.rejected_duplicates} duplicate rows")

        stored = _snapshot_models(config, store)
        if stored:
            print(f"stored {stored} model(s)")
    return EXIT_OK


@contextmanager
def _watermark_lock(state_path: Path):
    """One extraction at a time per watermark: O_EXCL lock file next to it."""
    lock_path = Path(f"{state_path}.lock")
    lock_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise CliError(
            f"another extraction appears to be running (lock file {lock_path} exists; "
            f"remove it if that extraction crashed)") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        try:
            lock_path.unlink()
        except OSError:
            pass


def _snapshot_models(config: Config, store: ArtifactStore) -> int:
    """Copy the configured model collection into the artifact store, raw XML."""
    count = 0
    if config.models_dir is not None:
        for path in sorted(Path(config.models_dir).glob("*.bpmn")):
            data = path.read_bytes()
            try:
                graph = parse_bpmn(data)
            except Exception as exc:
                log.warning("skipping unreadable model %s: %s", path, exc)
                continue
            store.write_model(graph.process_id or path.stem, data)
            count += 1
    elif config.models_rest_url is not None:
        for key, xml in sorted(fetch_models_rest(config.models_rest_url).items()):
            store.write_model(key, xml)
            count += 1
    return count


def cmd_discover(config: Config, args) -> int:
    event_log = _load_store_log(config, args.process)
    if args.format == "dfg":
        print(json.dumps(discover_dfg(event_log).to_json(), indent=2))
    elif args.format == "tree":
        print(format_tree(inductive_miner(event_log)))
    else:  # pnml-like-json
        net = tree_to_petri(inductive_miner(event_log))
        print(json.dumps(_net_json(net), indent=2))
    return EXIT_OK


def cmd_conform(config: Config, args) -> int:
    event_log = _load_store_log(config, args.process)
    model_path = Path(args.model)
    net = _net_from_model_file(model_path)
    if model_path.suffix != ".tree":
        # Engine logs record gateway traversals, but gateways map to silent
        # transitions; drop them so labels line up with the net.
        keep = {e.activity_type for e in event_log.iter_events()} - GATEWAY_KINDS
        event_log = filter_activity_types(event_log, keep)
    fitness = replay_fitness(event_log, net)
    precision = etc_precision(event_log, net)
    print(json.dumps({"fitness": fitness.to_json(), "precision": precision.to_json()}, indent=2))
    return EXIT_OK


def cmd_sna(config: Config, args) -> int:
    event_log = _load_store_log(config, args.process)
    matrix = analytics.sna_matrix(event_log, args.metric)
    print(json.dumps(matrix.to_json(), indent=2))
    return EXIT_OK


def cmd_cases(config: Config, args) -> int:
    event_log = _load_store_log(config, args.process)
    summaries = analytics.case_statistics(event_log)
    if args.top is not None:
        summaries = summaries[:args.top]
    print(json.dumps([s.to_json() for s in summaries], indent=2))
    return EXIT_OK


def cmd_decisions(config: Config, args) -> int:
    # Decision mining needs the gateway traversal events, so the
    # activity-type filter is deliberately not applied here.
    event_log = _load_store_log(config, args.process, apply_filter=False)
    graph = parse_bpmn(Path(args.model).read_bytes())
    guards = analytics.decision_mining(event_log, graph, min_accuracy=args.min_accuracy)
    print(json.dumps([g.to_json() for g in guards], indent=2))
    return EXIT_OK


def cmd_serve(config: Config, args) -> int:
    import uvicorn
    from .service import create_app
    app = create_app(config.output_dir, ui_dir=config.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port or config.service_port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowmine",
                                     description="Process mining over workflow-engine history data")
    parser.add_argument("--config", required=True, help="path to config JSON")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("extract", help="incrementally extract logs (and model snapshots)")

    p = sub.add_parser("discover", help="discover a model from an extracted log")
    p.add_argument("--process", required=True)
    p.add_argument("--format", choices=["dfg", "tree", "pnml-like-json"], default="dfg")

    p = sub.add_parser("conform", help="replay fitness and precision against a model")
    p.add_argument("--process", required=True)
    p.add_argument("--model", required=True, help="*.bpmn or *.tree model file")

    p = sub.add_parser("sna", help="social network matrix")
    p.add_argument("--process", required=True)
    p.add_argument("--metric", choices=list(analytics.SNA_METRICS), default=analytics.HANDOVER)

    p = sub.add_parser("cases", help="case duration statistics")
    p.add_argument("--process", required=True)
    p.add_argument("--top", type=int, default=None)

    p = sub.add_parser("decisions", help="mine gateway guards")
    p.add_argument("--process", required=True)
    p.add_argument("--model", required=True, help="*.bpmn model file")
    p.add_argument("--min-accuracy", type=float, default=0.75)

    p = sub.add_parser("serve", help="start the read-only JSON service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)

    return parser


COMMANDS = {
    "extract": cmd_extract,
    "discover": cmd_discover,
    "conform": cmd_conform,
    "sna": cmd_sna,
    "cases": cmd_cases,
    "decisions": cmd_decisions,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](config, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ExtractionError, StoreError) as exc:
        code = EXIT_SOURCE_UNREACHABLE if isinstance(exc, SourceUnreachableError) else EXIT_ERROR
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
