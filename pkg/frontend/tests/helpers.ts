// Shared mock API plumbing for the UI tests: every request is recorded,
// responses come from fixtures, no backend involved.

import { vi } from "vitest";
import type { CaseDetail, CaseSummary, Dfg, ProcessInfo, SnaMatrix } from "../src/types.js";

export const PROCESSES: ProcessInfo[] = [
  { key: "invoice", n_cases: 12, n_events: 106 },
  { key: "payment", n_cases: 5, n_events: 20 },
];

export const DFG_FIXTURE: Dfg = {
  activities: { "Approve Invoice": 14, "Prepare Bank Transfer": 8 },
  edges: [{ from: "Approve Invoice", to: "Prepare Bank Transfer", count: 8, mean_gap: 240.0 }],
  start: { "Approve Invoice": 12 },
  end: { "Prepare Bank Transfer": 12 },
};

export const EMPTY_DFG: Dfg = { activities: {}, edges: [], start: {}, end: {} };

export const CASES_FIXTURE: CaseSummary[] = [
  { case_id: "invoice-003", n_events: 9, start: "2021-05-01T08:00:00.000+00:00",
    end: "2021-05-01T10:00:00.000+00:00", duration: 7200 },
  { case_id: "invoice-001", n_events: 7, start: "2021-05-01T09:00:00.000+00:00",
    end: "2021-05-01T09:30:00.000+00:00", duration: 1800 },
];

export const CASE_DETAIL_FIXTURE: CaseDetail = {
  case_id: "invoice-003",
  events: [
    { event_id: "E1", activity: "Invoice received", activity_id: "invoiceReceived",
      activity_type: "startEvent", start: "2021-05-01T08:00:00.000+00:00",
      end: "2021-05-01T08:00:01.000+00:00", resource: null, attributes: { amount: 120 } },
    { event_id: "E2", activity: "Approve Invoice", activity_id: "approveInvoice",
      activity_type: "userTask", start: "2021-05-01T08:05:00.000+00:00",
      end: "2021-05-01T08:15:00.000+00:00", resource: "mary", attributes: {} },
  ],
};

export const SNA_FIXTURE: SnaMatrix = {
  metric: "handover",
  resources: ["demo", "mary"],
  values: [[0, 3], [1, 0]],
};

export const ZERO_SNA: SnaMatrix = {
  metric: "working_together",
  resources: ["demo", "mary"],
  values: [[0, 0], [0, 0]],
};

export interface MockBackend {
  requests: string[];
  fetch: typeof fetch;
  respond(pattern: string, body: unknown, status?: number): void;
}

export function mockBackend(): MockBackend {
  const routes: Array<{ pattern: string; body: unknown; status: number }> = [];
  const requests: string[] = [];
  const impl = vi.fn(async (input: RequestInfo | URL) => {
    const url = String(input);
    requests.push(url);
    for (const route of routes) {
      if (url.includes(route.pattern)) {
        return new Response(JSON.stringify(route.body), {
          status: route.status,
          headers: { "content-type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ error: `no route for ${url}` }), { status: 404 });
  });
  return {
    requests,
    fetch: impl as unknown as typeof fetch,
    respond(pattern, body, status = 200) {
      routes.unshift({ pattern, body, status });
    },
  };
}

export function defaultBackend(): MockBackend {
  // respond() prepends, so register from generic to specific
  const backend = mockBackend();
  backend.respond("/api/processes", PROCESSES);
  backend.respond("/sna", SNA_FIXTURE);
  backend.respond("/cases", CASES_FIXTURE);
  backend.respond("/cases/invoice-003", CASE_DETAIL_FIXTURE);
  backend.respond("/dfg", DFG_FIXTURE);
  return backend;
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
