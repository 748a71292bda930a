import { describe, expect, it } from "vitest";

import {
  LAYOUT,
  edgeWidthFor,
  groupDetail,
  radiusFor,
  renderGraph,
  topicDetail,
  edgeDetail,
} from "../src/render.js";
import { renderTimeseries } from "../src/timeseries.js";
import type { GraphDocument, TopicSeries } from "../src/types.js";

import graphFixture from "./fixtures/graph_two_account.json";
import seriesFixture from "./fixtures/timeseries_lj000.json";

const graph = graphFixture as GraphDocument;
const series = seriesFixture as TopicSeries;

const noopCallbacks = {
  onHoverTopic: () => {},
  onHoverGroup: () => {},
  onHoverEdge: () => {},
  onLeave: () => {},
};

describe("renderGraph", () => {
  it("renders exactly the served node and edge counts", () => {
    const host = document.createElement("div");
    renderGraph(host, graph, noopCallbacks);
    expect(host.querySelectorAll("circle.topic-node").length).toBe(
      graph.topic_nodes.length,
    );
    expect(host.querySelectorAll("circle.group-node").length).toBe(
      graph.group_nodes.length,
    );
    expect(host.querySelectorAll("line.edge").length).toBe(graph.edges.length);
  });

  it("keeps topics in the left column and groups in the right", () => {
    const host = document.createElement("div");
    renderGraph(host, graph, noopCallbacks);
    for (const circle of host.querySelectorAll("circle.topic-node")) {
      expect(Number(circle.getAttribute("cx"))).toBe(LAYOUT.topicX);
    }
    for (const circle of host.querySelectorAll("circle.group-node")) {
      expect(Number(circle.getAttribute("cx"))).toBe(LAYOUT.groupX);
    }
    expect(LAYOUT.topicX).toBeLessThan(LAYOUT.groupX);
  });

  it("encodes served ratios as node area and edge width", () => {
    const host = document.createElement("div");
    renderGraph(host, graph, noopCallbacks);
    for (const node of graph.topic_nodes) {
      const circle = host.querySelector(`circle.topic-node[data-key="${node.key}"]`);
      expect(Number(circle?.getAttribute("r"))).toBeCloseTo(
        radiusFor(node.size_ratio),
        10,
      );
    }
    // area proportionality: r^2 ratios track size ratios
    const a = radiusFor(1.0);
    const b = radiusFor(0.5);
    expect((a * a) / (b * b)).toBeCloseTo(2.0, 10);
    for (const edge of graph.edges) {
      const line = host.querySelector(
        `line.edge[data-group="${edge.group_n}"][data-topic="${edge.topic_key}"]`,
      );
      expect(Number(line?.getAttribute("stroke-width"))).toBeCloseTo(
        edgeWidthFor(edge.width_ratio),
        10,
      );
    }
  });

  it("is deterministic for a given document", () => {
    const host1 = document.createElement("div");
    const host2 = document.createElement("div");
    renderGraph(host1, graph, noopCallbacks);
    renderGraph(host2, graph, noopCallbacks);
    expect(host1.innerHTML).toBe(host2.innerHTML);
  });
});

describe("hover panels", () => {
  it("group panel shows the three served fields verbatim", () => {
    const node = graph.group_nodes[1];
    const panel = groupDetail(node);
    const values = Array.from(panel.querySelectorAll("dd")).map(
      (dd) => dd.textContent,
    );
    expect(values).toEqual([
      String(node.account_count),
      String(node.ratio_to_all_accounts),
      String(node.topics_covered),
    ]);
    const terms = Array.from(panel.querySelectorAll("dt")).map(
      (dt) => dt.textContent,
    );
    expect(terms).toEqual(["accounts", "ratio to all accounts", "topics covered"]);
  });

  it("every displayed number appears verbatim in the served document", () => {
    const served = JSON.stringify(graph);
    const panels = [
      ...graph.topic_nodes.map(topicDetail),
      ...graph.group_nodes.map(groupDetail),
      ...graph.edges.map(edgeDetail),
    ];
    for (const panel of panels) {
      for (const dd of panel.querySelectorAll("dd")) {
        const numbers = dd.textContent?.match(/\d+(?:\.\d+)?/g) ?? [];
        for (const token of numbers) {
          expect(served).toContain(token.replace(/\.0$/, ""));
        }
      }
    }
  });
});

describe("renderTimeseries", () => {
  it("marks only present weeks and carries verbatim values", () => {
    const host = document.createElement("div");
    renderTimeseries(host, series, [1, 2, 3]);
    const bars = host.querySelectorAll("rect.text-ratio-bar");
    expect(bars.length).toBe(2); // week 3 absent, not zero
    const values = Array.from(bars).map((bar) => bar.getAttribute("data-value"));
    expect(values).toEqual(["0.6", "0.5"]);
    const dots = host.querySelectorAll("circle.contributor-ratio-dot");
    expect(
      Array.from(dots).map((dot) => dot.getAttribute("data-value")),
    ).toEqual(["0.666667", "1"]);
  });
});
