// Case exploration: duration-sorted table with click-through to the
// event sequence of one case.

import type { CaseDetail, CaseSummary } from "./types.js";

function formatDuration(seconds: number): string {
  if (seconds >= 86400) return `${(seconds / 86400).toFixed(1)} d`;
  if (seconds >= 3600) return `${(seconds / 3600).toFixed(1)} h`;
  if (seconds >= 60) return `${(seconds / 60).toFixed(1)} min`;
  return `${seconds.toFixed(0)} s`;
}

export function renderCaseTable(
  container: HTMLElement,
  cases: CaseSummary[],
  onSelect: (caseId: string) => void,
): void {
  container.replaceChildren();
  if (cases.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No cases extracted for this process.";
    container.append(empty);
    return;
  }
  const table = document.createElement("table");
  table.className = "case-table";
  table.innerHTML =
    "<thead><tr><th>Case</th><th>Events</th><th>Start</th><th>End</th><th>Duration</th></tr></thead>";
  const body = document.createElement("tbody");
  for (const summary of cases) {
    const row = document.createElement("tr");
    row.dataset.caseId = summary.case_id;
    row.innerHTML =
      `<td>${summary.case_id}</td><td>${summary.n_events}</td>` +
      `<td>${summary.start}</td><td>${summary.end}</td>` +
      `<td>${formatDuration(summary.duration)}</td>`;
    row.addEventListener("click", () => onSelect(summary.case_id));
    body.append(row);
  }
  table.append(body);
  container.append(table);
}

export function renderCaseDetail(container: HTMLElement, detail: CaseDetail): void {
  container.replaceChildren();
  const heading = document.createElement("h3");
  heading.textContent = `Case ${detail.case_id}`;
  const list = document.createElement("ol");
  list.className = "event-timeline";
  for (const event of detail.events) {
    const item = document.createElement("li");
    item.dataset.eventId = event.event_id;
    const who = event.resource ? ` · ${event.resource}` : "";
    item.textContent = `${event.activity} (${event.activity_type})${who} — ${event.start} → ${event.end}`;
    list.append(item);
  }
  container.append(heading, list);
}

export function renderCaseError(container: HTMLElement, message: string): void {
  container.replaceChildren();
  const error = document.createElement("p");
  error.className = "inline-error";
  error.textContent = message;
  container.append(error);
}
