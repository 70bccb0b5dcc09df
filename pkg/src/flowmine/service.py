"""Read-only JSON API over an extracted artifact directory.

The service never touches the original source or the watermark state; it
serves whatever the last extraction wrote, plus the optional built web UI
as static files.
"""

from __future__ import annotations

from datetime import datetime
from pathlib import Path
from typing import Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import analytics
from .bpmn import TASK_KINDS, parse_bpmn
from .bpmn import decorate_model as decorate
from .discovery import discover_dfg
from .eventlog import EventLog, filter_activity_types
from .store import ArtifactStore
from .timestamps import format_ts, parse_ts


class ApiError(Exception):
    def __init__(self, status: int, error: str, field: str | None = None,
                 known: list[str] | None = None):
        self.status = status
        self.body: dict = {"error": error}
        if field is not None:
            self.body["field"] = field
        if known is not None:
            self.body["known"] = known
        super().__init__(error)


def _event_json(event) -> dict:
    attributes = {}
    for name, value in event.attributes.items():
        attributes[name] = format_ts(value) if isinstance(value, datetime) else value
    return {
        "event_id": event.event_id,
        "activity": event.activity,
        "activity_id": event.activity_id,
        "activity_type": event.activity_type,
        "start": format_ts(event.start),
        "end": format_ts(event.end),
        "resource": event.resource,
        "attributes": attributes,
    }


def _parse_date(raw: str | None, field: str) -> datetime | None:
    if raw is None or raw == "":
        return None
    try:
        return parse_ts(raw)
    except ValueError:
        raise ApiError(400, f"invalid timestamp {raw!r}", field=field) from None


def _filter_dates(log: EventLog, date_from: datetime | None, date_to: datetime | None) -> EventLog:
    """Trace-level containment: first start >= from and last end <= to."""
    if date_from is None and date_to is None:
        return log
    traces = []
    for trace in log.traces:
        start = trace.events[0].start
        end = max(e.end for e in trace.events)
        if date_from is not None and start < date_from:
            continue
        if date_to is not None and end > date_to:
            continue
        traces.append(trace)
    return EventLog(process_key=log.process_key, traces=tuple(traces))


def create_app(output_dir: Union[str, Path], ui_dir: Union[str, Path, None] = None) -> FastAPI:
    store = ArtifactStore(output_dir)
    logs: dict[str, EventLog] = {key: store.load_log(key) for key in store.process_keys()}

    app = FastAPI(title="flowmine", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body)

    def get_log(key: str) -> EventLog:
        if key not in logs:
            raise ApiError(404, f"unknown process key {key!r}", known=sorted(logs))
        return logs[key]

    @app.get("/api/processes")
    def list_processes():
        return [
            {"key": key, "n_cases": len(logs[key].traces), "n_events": logs[key].n_events}
            for key in sorted(logs)
        ]

    @app.get("/api/processes/{key}/dfg")
    def process_dfg(key: str, request: Request):
        event_log = get_log(key)
        params = request.query_params
        types = params.get("types", "all")
        if types not in ("all", "task"):
            raise ApiError(400, f"types must be 'task' or 'all', got {types!r}", field="types")
        date_from = _parse_date(params.get("from"), "from")
        date_to = _parse_date(params.get("to"), "to")
        event_log = _filter_dates(event_log, date_from, date_to)
        if types == "task":
            event_log = filter_activity_types(event_log, TASK_KINDS)
        return discover_dfg(event_log).to_json()

    @app.get("/api/processes/{key}/cases")
    def process_cases(key: str, request: Request):
        event_log = get_log(key)
        raw_top = request.query_params.get("top")
        top = None
        if raw_top is not None:
            try:
                top = int(raw_top)
            except ValueError:
                raise ApiError(400, f"top must be an integer, got {raw_top!r}", field="top") from None
            if top < 0:
                raise ApiError(400, "top must be nonnegative", field="top")
        summaries = analytics.case_statistics(event_log)
        if top is not None:
            summaries = summaries[:top]
        return [s.to_json() for s in summaries]

    @app.get("/api/processes/{key}/cases/{case_id}")
    def case_detail(key: str, case_id: str):
        event_log = get_log(key)
        for trace in event_log.traces:
            if trace.case_id == case_id:
                return {"case_id": case_id, "events": [_event_json(e) for e in trace.events]}
        raise ApiError(404, f"unknown case {case_id!r} in process {key!r}")

    @app.get("/api/processes/{key}/sna")
    def process_sna(key: str, request: Request):
        event_log = get_log(key)
        metric = request.query_params.get("metric", analytics.HANDOVER)
        if metric not in analytics.SNA_METRICS:
            raise ApiError(400, f"metric must be one of {sorted(analytics.SNA_METRICS)}, got {metric!r}",
                           field="metric")
        return analytics.sna_matrix(event_log, metric).to_json()

    @app.get("/api/processes/{key}/model")
    def process_model(key: str):
        get_log(key)
        xml = store.load_model_xml(key)
        if xml is None:
            raise ApiError(404, f"no model stored for process {key!r}")
        return Response(content=xml, media_type="application/xml")

    @app.get("/api/processes/{key}/decoration")
    def process_decoration(key: str):
        event_log = get_log(key)
        xml = store.load_model_xml(key)
        if xml is None:
            raise ApiError(404, f"no model stored for process {key!r}")
        graph = parse_bpmn(xml)
        return decorate(graph, event_log).to_json()

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
