// Application shell: process picker, view tabs, filter bar, and the three
// views. Every filter or view change issues exactly one API request; the
// frequency/performance toggle rerenders the cached DFG without fetching.

import { ApiClient, ApiError } from "./api.js";
import { renderCaseDetail, renderCaseError, renderCaseTable } from "./cases_view.js";
import { renderDfg } from "./dfg_view.js";
import { renderSna } from "./sna_view.js";
import { DEFAULT_STATE, formatState, parseState, ViewState } from "./state.js";
import type { Dfg } from "./types.js";

const CASE_TOP_N = 50;

export class App {
  state: ViewState = { ...DEFAULT_STATE };
  private lastDfg: Dfg | null = null;
  private controls!: {
    process: HTMLSelectElement;
    tabs: Record<string, HTMLButtonElement>;
    types: HTMLSelectElement;
    from: HTMLInputElement;
    to: HTMLInputElement;
    mode: HTMLButtonElement;
    metric: HTMLSelectElement;
    view: HTMLElement;
    detail: HTMLElement;
    status: HTMLElement;
  };

  constructor(private root: HTMLElement, private api: ApiClient,
              private history: { replace: (query: string) => void } = {
                replace: (query) => window.history.replaceState(null, "", query || location.pathname),
              }) {}

  async start(search: string): Promise<void> {
    this.state = parseState(search);
    this.buildShell();
    let processes;
    try {
      processes = await this.api.listProcesses();
    } catch (error) {
      this.controls.status.textContent = `Cannot load processes: ${describe(error)}`;
      return;
    }
    for (const info of processes) {
      const option = document.createElement("option");
      option.value = info.key;
      option.textContent = `${info.key} (${info.n_cases} cases, ${info.n_events} events)`;
      this.controls.process.append(option);
    }
    if (processes.length === 0) {
      this.controls.status.textContent = "No extracted processes found.";
      return;
    }
    if (!this.state.process || !processes.some((p) => p.key === this.state.process)) {
      this.state.process = processes[0].key;
    }
    this.controls.process.value = this.state.process;
    this.syncControls();
    await this.refresh();
  }

  private buildShell(): void {
    this.root.innerHTML = `
      <header class="topbar">
        <h1>flowmine</h1>
        <select id="process-select" title="process"></select>
        <nav>
          <button data-view="dfg">Process map</button>
          <button data-view="cases">Cases</button>
          <button data-view="sna">Resources</button>
        </nav>
      </header>
      <section class="filters">
        <label>Types
          <select id="types-select"><option value="all">all events</option>
          <option value="task">tasks only</option></select>
        </label>
        <label>From <input id="from-input" type="text" placeholder="2021-05-01T00:00:00Z"></label>
        <label>To <input id="to-input" type="text" placeholder="2021-06-01T00:00:00Z"></label>
        <button id="apply-filters">Apply</button>
        <button id="mode-toggle">Show performance</button>
        <label>Metric
          <select id="metric-select">
            <option value="handover">handover of work</option>
            <option value="working_together">working together</option>
            <option value="similar_activities">similar activities</option>
          </select>
        </label>
      </section>
      <p id="status" class="status" role="status"></p>
      <main id="view"></main>
      <aside id="detail"></aside>
    `;
    const q = <T extends Element>(sel: string) => this.root.querySelector(sel) as T;
    this.controls = {
      process: q("#process-select"),
      tabs: {
        dfg: q('button[data-view="dfg"]'),
        cases: q('button[data-view="cases"]'),
        sna: q('button[data-view="sna"]'),
      },
      types: q("#types-select"),
      from: q("#from-input"),
      to: q("#to-input"),
      mode: q("#mode-toggle"),
      metric: q("#metric-select"),
      view: q("#view"),
      detail: q("#detail"),
      status: q("#status"),
    };
    this.controls.process.addEventListener("change", () => {
      this.state.process = this.controls.process.value;
      void this.refresh();
    });
    for (const [name, button] of Object.entries(this.controls.tabs)) {
      button.addEventListener("click", () => {
        this.state.view = name as ViewState["view"];
        void this.refresh();
      });
    }
    q<HTMLButtonElement>("#apply-filters").addEventListener("click", () => {
      this.state.types = this.controls.types.value as "all" | "task";
      this.state.from = this.controls.from.value.trim();
      this.state.to = this.controls.to.value.trim();
      void this.refresh();
    });
    this.controls.mode.addEventListener("click", () => {
      this.state.mode = this.state.mode === "frequency" ? "performance" : "frequency";
      this.syncControls();
      this.pushUrl();
      if (this.lastDfg) renderDfg(this.controls.view, this.lastDfg, this.state.mode);
    });
    this.controls.metric.addEventListener("change", () => {
      this.state.metric = this.controls.metric.value as ViewState["metric"];
      void this.refresh();
    });
  }

  private syncControls(): void {
    this.controls.types.value = this.state.types;
    this.controls.from.value = this.state.from;
    this.controls.to.value = this.state.to;
    this.controls.metric.value = this.state.metric;
    this.controls.mode.textContent =
      this.state.mode === "frequency" ? "Show performance" : "Show frequency";
    for (const [name, button] of Object.entries(this.controls.tabs)) {
      button.classList.toggle("active", name === this.state.view);
    }
    const filterRelevant = this.state.view === "dfg";
    this.controls.mode.toggleAttribute("hidden", !filterRelevant);
    this.controls.metric.parentElement?.toggleAttribute("hidden", this.state.view !== "sna");
  }

  private pushUrl(): void {
    this.history.replace(formatState(this.state));
  }

  async refresh(): Promise<void> {
    if (!this.state.process) return;
    this.syncControls();
    this.pushUrl();
    this.controls.status.textContent = "";
    this.controls.detail.replaceChildren();
    try {
      if (this.state.view === "dfg") {
        const dfg = await this.api.dfg(this.state.process, this.state.types,
                                       this.state.from, this.state.to);
        this.lastDfg = dfg;
        renderDfg(this.controls.view, dfg, this.state.mode);
      } else if (this.state.view === "cases") {
        const cases = await this.api.cases(this.state.process, CASE_TOP_N);
        renderCaseTable(this.controls.view, cases, (caseId) => void this.openCase(caseId));
      } else {
        const matrix = await this.api.sna(this.state.process, this.state.metric);
        renderSna(this.controls.view, matrix);
      }
    } catch (error) {
      if ((error as Error).name === "AbortError") return; // superseded request
      this.controls.status.textContent = describe(error);
      this.controls.view.replaceChildren();
    }
  }

  async openCase(caseId: string): Promise<void> {
    if (!this.state.process) return;
    try {
      const detail = await this.api.caseDetail(this.state.process, caseId);
      renderCaseDetail(this.controls.detail, detail);
    } catch (error) {
      if ((error as Error).name === "AbortError") return;
      renderCaseError(this.controls.detail, describe(error));
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.message} (HTTP ${error.status})`;
  return error instanceof Error ? error.message : String(error);
}

export function boot(): void {
  const root = document.getElementById("app");
  if (root) {
    void new App(root, new ApiClient()).start(location.search);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
