// Resource network: force-directed layout computed with a fixed-step,
// seeded simulation so a given matrix always renders identically.

import type { SnaMatrix } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 420;

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function forceLayout(n: number, edges: Array<[number, number, number]>,
                            iterations = 150): Array<[number, number]> {
  const rand = mulberry32(42);
  const pos: Array<[number, number]> = [];
  for (let i = 0; i < n; i++) {
    pos.push([SIZE * (0.2 + 0.6 * rand()), SIZE * (0.2 + 0.6 * rand())]);
  }
  const maxWeight = Math.max(...edges.map(([, , w]) => w), 1);
  for (let step = 0; step < iterations; step++) {
    const force: Array<[number, number]> = pos.map(() => [0, 0]);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const dx = pos[i][0] - pos[j][0];
        const dy = pos[i][1] - pos[j][1];
        const dist = Math.max(12, Math.hypot(dx, dy));
        const repulse = 2200 / (dist * dist);
        force[i][0] += (dx / dist) * repulse;
        force[i][1] += (dy / dist) * repulse;
        force[j][0] -= (dx / dist) * repulse;
        force[j][1] -= (dy / dist) * repulse;
      }
    }
    for (const [i, j, weight] of edges) {
      if (i === j) continue;
      const dx = pos[j][0] - pos[i][0];
      const dy = pos[j][1] - pos[i][1];
      const dist = Math.max(12, Math.hypot(dx, dy));
      const attract = 0.002 * (weight / maxWeight) * (dist - 90);
      force[i][0] += dx * attract;
      force[i][1] += dy * attract;
      force[j][0] -= dx * attract;
      force[j][1] -= dy * attract;
    }
    const cooling = 1 - step / iterations;
    for (let i = 0; i < n; i++) {
      pos[i][0] = Math.min(SIZE - 20, Math.max(20, pos[i][0] + force[i][0] * cooling));
      pos[i][1] = Math.min(SIZE - 20, Math.max(20, pos[i][1] + force[i][1] * cooling));
    }
  }
  return pos;
}

function el(tag: string, attrs: Record<string, string>, text?: string): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) node.setAttribute(name, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSna(container: HTMLElement, matrix: SnaMatrix): void {
  container.replaceChildren();
  const n = matrix.resources.length;
  if (n === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No resources recorded for this process.";
    container.append(empty);
    return;
  }

  const edges: Array<[number, number, number]> = [];
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      if (i !== j && matrix.values[i][j] > 0) edges.push([i, j, matrix.values[i][j]]);
    }
  }
  const pos = forceLayout(n, edges);
  const maxWeight = Math.max(...edges.map(([, , w]) => w), 1);

  const svg = el("svg", {
    viewBox: `0 0 ${SIZE} ${SIZE}`,
    width: String(SIZE),
    height: String(SIZE),
    class: "sna-svg",
  });
  for (const [i, j, weight] of edges) {
    svg.append(el("line", {
      x1: String(pos[i][0]),
      y1: String(pos[i][1]),
      x2: String(pos[j][0]),
      y2: String(pos[j][1]),
      class: "sna-edge",
      "stroke-width": (0.5 + 4 * (weight / maxWeight)).toFixed(2),
      "data-pair": `${matrix.resources[i]}→${matrix.resources[j]}`,
    }));
  }
  matrix.resources.forEach((resource, i) => {
    const group = el("g", { class: "sna-node", "data-resource": resource });
    group.append(
      el("circle", { cx: String(pos[i][0]), cy: String(pos[i][1]), r: "14" }),
      el("text", {
        x: String(pos[i][0]),
        y: String(pos[i][1] - 18),
        "text-anchor": "middle",
        class: "sna-label",
      }, resource),
    );
    svg.append(group);
  });
  container.append(svg);
}
