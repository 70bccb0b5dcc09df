// View state <-> URL query string. Filters must survive a round trip so
// links are shareable.

import type { DecorationMode, SnaMetric, ViewName } from "./types.js";

export interface ViewState {
  process: string | null;
  view: ViewName;
  types: "all" | "task";
  from: string;
  to: string;
  mode: DecorationMode;
  metric: SnaMetric;
}

export const DEFAULT_STATE: ViewState = {
  process: null,
  view: "dfg",
  types: "all",
  from: "",
  to: "",
  mode: "frequency",
  metric: "handover",
};

const VIEWS: ViewName[] = ["dfg", "cases", "sna"];
const METRICS: SnaMetric[] = ["handover", "working_together", "similar_activities"];

export function parseState(search: string): ViewState {
  const params = new URLSearchParams(search);
  const view = params.get("view");
  const metric = params.get("metric");
  return {
    process: params.get("process"),
    view: VIEWS.includes(view as ViewName) ? (view as ViewName) : DEFAULT_STATE.view,
    types: params.get("types") === "task" ? "task" : "all",
    from: params.get("from") ?? "",
    to: params.get("to") ?? "",
    mode: params.get("mode") === "performance" ? "performance" : "frequency",
    metric: METRICS.includes(metric as SnaMetric) ? (metric as SnaMetric) : DEFAULT_STATE.metric,
  };
}

export function formatState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.process) params.set("process", state.process);
  if (state.view !== DEFAULT_STATE.view) params.set("view", state.view);
  if (state.types !== DEFAULT_STATE.types) params.set("types", state.types);
  if (state.from) params.set("from", state.from);
  if (state.to) params.set("to", state.to);
  if (state.mode !== DEFAULT_STATE.mode) params.set("mode", state.mode);
  if (state.metric !== DEFAULT_STATE.metric) params.set("metric", state.metric);
  const text = params.toString();
  return text ? `?${text}` : "";
}
