// Payload shapes of the JSON API, mirrored verbatim.

export interface ProcessInfo {
  key: string;
  n_cases: number;
  n_events: number;
}

export interface DfgEdge {
  from: string;
  to: string;
  count: number;
  mean_gap: number;
}

export interface Dfg {
  activities: Record<string, number>;
  edges: DfgEdge[];
  start: Record<string, number>;
  end: Record<string, number>;
}

export interface CaseSummary {
  case_id: string;
  n_events: number;
  start: string;
  end: string;
  duration: number;
}

export interface CaseEvent {
  event_id: string;
  activity: string;
  activity_id: string;
  activity_type: string;
  start: string;
  end: string;
  resource: string | null;
  attributes: Record<string, unknown>;
}

export interface CaseDetail {
  case_id: string;
  events: CaseEvent[];
}

export interface SnaMatrix {
  metric: SnaMetric;
  resources: string[];
  values: number[][];
}

export type SnaMetric = "handover" | "working_together" | "similar_activities";
export type ViewName = "dfg" | "cases" | "sna";
export type DecorationMode = "frequency" | "performance";
