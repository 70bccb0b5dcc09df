// Directly-follows graph view: SVG with a deterministic layered layout.
// Mode toggling (frequency vs performance) relabels edges from the same
// payload without another request.

import type { DecorationMode, Dfg } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_HEIGHT = 34;
const LAYER_GAP = 92;
const COLUMN_GAP = 30;

interface NodeBox {
  x: number;
  y: number;
  width: number;
}

export function assignLayers(dfg: Dfg): Map<string, number> {
  // Longest path from the start activities; cycles fall back to the
  // first-seen layer, which keeps the result deterministic.
  const layers = new Map<string, number>();
  const activities = Object.keys(dfg.activities).sort();
  const outgoing = new Map<string, string[]>();
  for (const activity of activities) outgoing.set(activity, []);
  for (const edge of [...dfg.edges].sort((a, b) => (a.from + a.to).localeCompare(b.from + b.to))) {
    outgoing.get(edge.from)?.push(edge.to);
  }
  const roots = Object.keys(dfg.start).sort();
  const queue: Array<[string, number]> = roots.map((a) => [a, 0]);
  while (queue.length) {
    const [activity, layer] = queue.shift()!;
    const known = layers.get(activity);
    if (known !== undefined && known >= layer) continue;
    if (known === undefined || layer > known) layers.set(activity, layer);
    if (layer > activities.length) continue; // cycle guard
    for (const next of outgoing.get(activity) ?? []) {
      queue.push([next, layer + 1]);
    }
  }
  for (const activity of activities) {
    if (!layers.has(activity)) layers.set(activity, 0);
  }
  return layers;
}

function nodeWidth(label: string): number {
  return Math.max(70, 16 + label.length * 7.2);
}

function layout(dfg: Dfg): Map<string, NodeBox> {
  const layers = assignLayers(dfg);
  const byLayer = new Map<number, string[]>();
  for (const [activity, layer] of layers) {
    if (!byLayer.has(layer)) byLayer.set(layer, []);
    byLayer.get(layer)!.push(activity);
  }
  const boxes = new Map<string, NodeBox>();
  for (const [layer, activities] of byLayer) {
    activities.sort();
    let x = 20;
    for (const activity of activities) {
      const width = nodeWidth(activity);
      boxes.set(activity, { x, y: 30 + layer * LAYER_GAP, width });
      x += width + COLUMN_GAP;
    }
  }
  return boxes;
}

function el(tag: string, attrs: Record<string, string>, text?: string): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) node.setAttribute(name, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function formatGap(seconds: number): string {
  if (seconds >= 86400) return `${(seconds / 86400).toFixed(1)}d`;
  if (seconds >= 3600) return `${(seconds / 3600).toFixed(1)}h`;
  if (seconds >= 60) return `${(seconds / 60).toFixed(1)}m`;
  return `${seconds.toFixed(1)}s`;
}

export function renderDfg(container: HTMLElement, dfg: Dfg, mode: DecorationMode): void {
  container.replaceChildren();
  const activities = Object.keys(dfg.activities);
  if (activities.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No events match the current filters.";
    container.append(empty);
    return;
  }

  const boxes = layout(dfg);
  const maxCount = Math.max(...dfg.edges.map((e) => e.count), 1);
  let width = 0;
  let height = 0;
  for (const box of boxes.values()) {
    width = Math.max(width, box.x + box.width + 20);
    height = Math.max(height, box.y + NODE_HEIGHT + 50);
  }

  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "dfg-svg",
  });

  for (const edge of dfg.edges) {
    const from = boxes.get(edge.from)!;
    const to = boxes.get(edge.to)!;
    const x1 = from.x + from.width / 2;
    const y1 = from.y + NODE_HEIGHT;
    const x2 = to.x + to.width / 2;
    const y2 = to.y;
    const midX = (x1 + x2) / 2;
    const midY = (y1 + y2) / 2;
    const path = el("path", {
      d: `M ${x1} ${y1} C ${x1} ${y1 + 30}, ${x2} ${y2 - 30}, ${x2} ${y2}`,
      class: "dfg-edge",
      fill: "none",
      "stroke-width": String(1 + 3 * (edge.count / maxCount)),
      "data-from": edge.from,
      "data-to": edge.to,
    });
    const label = el("text", {
      x: String(midX + 4),
      y: String(midY),
      class: "dfg-edge-label",
      "data-edge": `${edge.from}→${edge.to}`,
    }, mode === "frequency" ? String(edge.count) : formatGap(edge.mean_gap));
    svg.append(path, label);
  }

  const maxActivity = Math.max(...Object.values(dfg.activities), 1);
  for (const [activity, box] of boxes) {
    const count = dfg.activities[activity] ?? 0;
    const shade = 0.25 + 0.75 * (count / maxActivity);
    const group = el("g", { class: "dfg-node", "data-activity": activity });
    group.append(
      el("rect", {
        x: String(box.x),
        y: String(box.y),
        width: String(box.width),
        height: String(NODE_HEIGHT),
        rx: "6",
        "fill-opacity": shade.toFixed(3),
      }),
      el("text", {
        x: String(box.x + box.width / 2),
        y: String(box.y + 14),
        class: "dfg-node-label",
        "text-anchor": "middle",
      }, activity),
      el("text", {
        x: String(box.x + box.width / 2),
        y: String(box.y + 28),
        class: "dfg-node-count",
        "text-anchor": "middle",
      }, String(count)),
    );
    svg.append(group);
  }
  container.append(svg);
}
