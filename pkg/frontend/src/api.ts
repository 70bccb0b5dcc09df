// Thin fetch client. A newer request for the same slot aborts the one in
// flight (latest wins), so stale filter results never land in the UI.

import type { CaseDetail, CaseSummary, Dfg, ProcessInfo, SnaMatrix, SnaMetric } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  private controllers = new Map<string, AbortController>();

  constructor(private base: string = "") {}

  private async get<T>(path: string, slot?: string): Promise<T> {
    let signal: AbortSignal | undefined;
    if (slot) {
      this.controllers.get(slot)?.abort();
      const controller = new AbortController();
      this.controllers.set(slot, controller);
      signal = controller.signal;
    }
    const response = await fetch(this.base + path, { signal });
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      try {
        const body = await response.json();
        if (body && typeof body.error === "string") message = body.error;
      } catch {
        // non-JSON error body; keep the status message
      }
      throw new ApiError(response.status, message);
    }
    return (await response.json()) as T;
  }

  listProcesses(): Promise<ProcessInfo[]> {
    return this.get("/api/processes");
  }

  dfg(process: string, types: "all" | "task", from: string, to: string): Promise<Dfg> {
    const params = new URLSearchParams();
    if (types !== "all") params.set("types", types);
    if (from) params.set("from", from);
    if (to) params.set("to", to);
    const query = params.toString();
    const key = encodeURIComponent(process);
    return this.get(`/api/processes/${key}/dfg${query ? `?${query}` : ""}`, "dfg");
  }

  cases(process: string, top?: number): Promise<CaseSummary[]> {
    const key = encodeURIComponent(process);
    const query = top !== undefined ? `?top=${top}` : "";
    return this.get(`/api/processes/${key}/cases${query}`, "cases");
  }

  caseDetail(process: string, caseId: string): Promise<CaseDetail> {
    const key = encodeURIComponent(process);
    return this.get(`/api/processes/${key}/cases/${encodeURIComponent(caseId)}`, "case-detail");
  }

  sna(process: string, metric: SnaMetric): Promise<SnaMatrix> {
    const key = encodeURIComponent(process);
    return this.get(`/api/processes/${key}/sna?metric=${metric}`, "sna");
  }
}
