import type { GraphDocument, GraphEdge, GroupNode, TopicNode } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const LAYOUT = {
  width: 880,
  height: 560,
  topicX: 200,
  groupX: 680,
  marginY: 48,
  maxRadius: 34,
  minRadius: 3,
  maxEdgeWidth: 22,
};

/** Vertical slot positions for n nodes, identical for every render. */
function slots(count: number): number[] {
  if (count === 0) return [];
  const usable = LAYOUT.height - 2 * LAYOUT.marginY;
  if (count === 1) return [LAYOUT.height / 2];
  return Array.from(
    { length: count },
    (_, i) => LAYOUT.marginY + (usable * i) / (count - 1),
  );
}

/** Node area encodes the served ratio, so radius grows with its square root. */
export function radiusFor(ratio: number): number {
  return Math.max(LAYOUT.minRadius, LAYOUT.maxRadius * Math.sqrt(Math.max(0, ratio)));
}

export function edgeWidthFor(ratio: number): number {
  return Math.max(0.75, LAYOUT.maxEdgeWidth * Math.max(0, ratio));
}

export interface RenderCallbacks {
  onHoverTopic(node: TopicNode): void;
  onHoverGroup(node: GroupNode): void;
  onHoverEdge(edge: GraphEdge): void;
  onLeave(): void;
}

/**
 * Draw the bipartite graph: topics in the left column, dispersion groups in
 * the right one (nodes and edges exactly as served, in served order).
 */
export function renderGraph(
  container: HTMLElement,
  graph: GraphDocument,
  callbacks: RenderCallbacks,
): SVGSVGElement {
  container.textContent = "";
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${LAYOUT.width} ${LAYOUT.height}`);
  svg.setAttribute("class", "week-graph");

  const topicY = new Map<string, number>();
  slots(graph.topic_nodes.length).forEach((y, i) => {
    topicY.set(graph.topic_nodes[i].key, y);
  });
  const groupY = new Map<number, number>();
  slots(graph.group_nodes.length).forEach((y, i) => {
    groupY.set(graph.group_nodes[i].n, y);
  });

  for (const edge of graph.edges) {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("class", "edge");
    line.setAttribute("data-group", String(edge.group_n));
    line.setAttribute("data-topic", edge.topic_key);
    line.setAttribute("x1", String(LAYOUT.topicX));
    line.setAttribute("y1", String(topicY.get(edge.topic_key) ?? LAYOUT.height / 2));
    line.setAttribute("x2", String(LAYOUT.groupX));
    line.setAttribute("y2", String(groupY.get(edge.group_n) ?? LAYOUT.height / 2));
    line.setAttribute("stroke-width", String(edgeWidthFor(edge.width_ratio)));
    line.addEventListener("mouseenter", () => callbacks.onHoverEdge(edge));
    line.addEventListener("mouseleave", () => callbacks.onLeave());
    svg.appendChild(line);
  }

  for (const node of graph.topic_nodes) {
    const y = topicY.get(node.key) ?? LAYOUT.height / 2;
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("class", "topic-node");
    circle.setAttribute("data-key", node.key);
    circle.setAttribute("cx", String(LAYOUT.topicX));
    circle.setAttribute("cy", String(y));
    circle.setAttribute("r", String(radiusFor(node.size_ratio)));
    circle.addEventListener("mouseenter", () => callbacks.onHoverTopic(node));
    circle.addEventListener("mouseleave", () => callbacks.onLeave());
    svg.appendChild(circle);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("class", "topic-label");
    label.setAttribute("x", String(LAYOUT.topicX - radiusFor(node.size_ratio) - 8));
    label.setAttribute("y", String(y + 4));
    label.setAttribute("text-anchor", "end");
    label.textContent = node.key;
    svg.appendChild(label);
  }

  for (const node of graph.group_nodes) {
    const y = groupY.get(node.n) ?? LAYOUT.height / 2;
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("class", "group-node");
    circle.setAttribute("data-n", String(node.n));
    circle.setAttribute("cx", String(LAYOUT.groupX));
    circle.setAttribute("cy", String(y));
    circle.setAttribute("r", String(radiusFor(node.size_ratio)));
    circle.addEventListener("mouseenter", () => callbacks.onHoverGroup(node));
    circle.addEventListener("mouseleave", () => callbacks.onLeave());
    svg.appendChild(circle);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("class", "group-label");
    label.setAttribute("x", String(LAYOUT.groupX + radiusFor(node.size_ratio) + 8));
    label.setAttribute("y", String(y + 4));
    label.textContent = `${node.n}-topic`;
    svg.appendChild(label);
  }

  container.appendChild(svg);
  return svg;
}

/**
 * Hover panels repeat the served numbers verbatim; nothing is recomputed
 * or reformatted on the client.
 */
export function topicDetail(node: TopicNode): HTMLElement {
  const panel = document.createElement("dl");
  panel.setAttribute("class", "detail topic-detail");
  appendRow(panel, "topic", node.key);
  appendRow(panel, "share of week posts", String(node.pct_posts_of_week));
  appendRow(panel, "mean posts per account", String(node.mean_posts_per_account));
  for (const cell of node.groups) {
    appendRow(
      panel,
      `${cell.n}-topic group`,
      `${cell.accounts} accounts, share ${cell.pct_of_topic}`,
    );
  }
  return panel;
}

export function groupDetail(node: GroupNode): HTMLElement {
  const panel = document.createElement("dl");
  panel.setAttribute("class", "detail group-detail");
  appendRow(panel, "accounts", String(node.account_count));
  appendRow(panel, "ratio to all accounts", String(node.ratio_to_all_accounts));
  appendRow(panel, "topics covered", String(node.topics_covered));
  return panel;
}

export function edgeDetail(edge: GraphEdge): HTMLElement {
  const panel = document.createElement("dl");
  panel.setAttribute("class", "detail edge-detail");
  appendRow(panel, "group", `${edge.group_n}-topic`);
  appendRow(panel, "topic", edge.topic_key);
  appendRow(panel, "share of week texts", String(edge.width_ratio));
  appendRow(panel, "texts", String(edge.contributed_texts));
  return panel;
}

function appendRow(panel: HTMLElement, term: string, value: string): void {
  const dt = document.createElement("dt");
  dt.textContent = term;
  const dd = document.createElement("dd");
  dd.textContent = value;
  panel.appendChild(dt);
  panel.appendChild(dd);
}
