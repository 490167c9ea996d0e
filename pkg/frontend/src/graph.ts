import type { GraphView } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphRenderOptions {
  width?: number;
  height?: number;
  onSelect?: (nodeKey: string) => void;
}

/** The text form of one predicate unit, matching verdict evidence renderings. */
export function tripleRendering(subject: string, object: string, predicate: string): string {
  return subject === object ? `${subject} ${predicate}` : `${subject} ${predicate} ${object}`;
}

function svgEl<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

/**
 * Directed character graph on a circular layout. Every predicate unit
 * carries a data-rendering attribute so verdict evidence can be
 * highlighted; self-loop states draw as a small arc above the node.
 */
export function renderGraph(
  container: HTMLElement,
  graph: GraphView | null,
  options: GraphRenderOptions = {},
): void {
  container.innerHTML = "";
  if (!graph || graph.nodes.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.textContent = "No knowledge graph yet.";
    container.appendChild(empty);
    return;
  }

  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const svg = svgEl("svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "kg-canvas");

  const defs = svgEl("defs");
  const marker = svgEl("marker");
  marker.setAttribute("id", "kg-arrow");
  marker.setAttribute("viewBox", "0 0 10 10");
  marker.setAttribute("refX", "9");
  marker.setAttribute("refY", "5");
  marker.setAttribute("markerWidth", "7");
  marker.setAttribute("markerHeight", "7");
  marker.setAttribute("orient", "auto-start-reverse");
  const arrow = svgEl("path");
  arrow.setAttribute("d", "M 0 0 L 10 5 L 0 10 z");
  marker.appendChild(arrow);
  defs.appendChild(marker);
  svg.appendChild(defs);

  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) / 2 - 70;
  const positions = new Map<string, { x: number; y: number }>();
  graph.nodes.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / graph.nodes.length - Math.PI / 2;
    positions.set(node.key, {
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });

  const edgeLayer = svgEl("g");
  edgeLayer.setAttribute("class", "edges");
  for (const edge of graph.edges) {
    const from = positions.get(edge.subject);
    const to = positions.get(edge.object);
    if (!from || !to) continue;
    const group = svgEl("g");
    const isSelfLoop = edge.subject === edge.object;
    group.setAttribute("class", isSelfLoop ? "edge self-loop" : "edge");
    group.setAttribute("data-subject", edge.subject);
    group.setAttribute("data-object", edge.object);
    group.setAttribute(
      "data-renderings",
      JSON.stringify(
        edge.predicates.map((p) => tripleRendering(edge.subject, edge.object, p.predicate)),
      ),
    );

    const path = svgEl("path");
    if (isSelfLoop) {
      path.setAttribute(
        "d",
        `M ${from.x - 10} ${from.y - 14} C ${from.x - 34} ${from.y - 58}, ` +
          `${from.x + 34} ${from.y - 58}, ${from.x + 10} ${from.y - 14}`,
      );
    } else {
      // bend each direction of a pair differently so A->B and B->A stay apart
      const mx = (from.x + to.x) / 2;
      const my = (from.y + to.y) / 2;
      const dx = to.x - from.x;
      const dy = to.y - from.y;
      const norm = Math.hypot(dx, dy) || 1;
      const offset = 22;
      const ox = (-dy / norm) * offset;
      const oy = (dx / norm) * offset;
      path.setAttribute("d", `M ${from.x} ${from.y} Q ${mx + ox} ${my + oy} ${to.x} ${to.y}`);
    }
    path.setAttribute("fill", "none");
    path.setAttribute("marker-end", "url(#kg-arrow)");
    group.appendChild(path);

    const label = svgEl("text");
    label.setAttribute("class", "edge-label");
    if (isSelfLoop) {
      label.setAttribute("x", String(from.x));
      label.setAttribute("y", String(from.y - 52));
    } else {
      const mx = (from.x + to.x) / 2;
      const my = (from.y + to.y) / 2;
      label.setAttribute("x", String(mx));
      label.setAttribute("y", String(my - 6));
    }
    label.setAttribute("text-anchor", "middle");
    label.textContent = edge.predicates.map((p) => p.predicate).join(", ");
    group.appendChild(label);
    edgeLayer.appendChild(group);
  }
  svg.appendChild(edgeLayer);

  const nodeLayer = svgEl("g");
  nodeLayer.setAttribute("class", "nodes");
  for (const node of graph.nodes) {
    const pos = positions.get(node.key)!;
    const group = svgEl("g");
    group.setAttribute("class", "node");
    group.setAttribute("data-key", node.key);
    const circle = svgEl("circle");
    circle.setAttribute("cx", String(pos.x));
    circle.setAttribute("cy", String(pos.y));
    circle.setAttribute("r", "14");
    group.appendChild(circle);
    const label = svgEl("text");
    label.setAttribute("x", String(pos.x));
    label.setAttribute("y", String(pos.y + 30));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "node-label");
    label.textContent = node.display;
    group.appendChild(label);
    if (options.onSelect) {
      group.addEventListener("click", () => options.onSelect!(node.key));
    }
    nodeLayer.appendChild(group);
  }
  svg.appendChild(nodeLayer);
  container.appendChild(svg);
}

/** Mark the edges whose predicate units appear in `renderings`. */
export function highlightTriples(container: HTMLElement, renderings: string[]): number {
  const wanted = new Set(renderings);
  let hits = 0;
  container.querySelectorAll<SVGGElement>("g.edge").forEach((edge) => {
    const own: string[] = JSON.parse(edge.getAttribute("data-renderings") ?? "[]");
    const match = own.some((r) => wanted.has(r));
    edge.classList.toggle("highlighted", match);
    if (match) hits += 1;
  });
  return hits;
}
