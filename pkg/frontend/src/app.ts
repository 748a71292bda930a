import { ApiClient, ApiError } from "./api.js";
import {
  edgeDetail,
  groupDetail,
  renderGraph,
  topicDetail,
} from "./render.js";
import { renderTimeseries } from "./timeseries.js";
import type { Meta, ViewState } from "./types.js";

export interface AppOptions {
  pushHistory?: boolean;
}

/**
 * The dashboard: selector row (week / network / cluster / granularity),
 * the bipartite graph, a hover detail panel and a topic time-series view.
 * Every selector change issues exactly one /graph fetch (latest wins).
 */
export class App {
  state!: ViewState;
  meta!: Meta;
  fetchCount = 0;

  private readonly selectors: HTMLElement;
  private readonly graphHost: HTMLElement;
  private readonly detailHost: HTMLElement;
  private readonly errorHost: HTMLElement;
  private readonly seriesHost: HTMLElement;
  private readonly seriesSelect: HTMLSelectElement;
  private restoring = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly options: AppOptions = {},
  ) {
    this.selectors = this.section("selectors");
    this.errorHost = this.section("error-host");
    this.graphHost = this.section("graph-host");
    this.detailHost = this.section("detail-host");
    const seriesBlock = this.section("series-block");
    this.seriesSelect = document.createElement("select");
    this.seriesSelect.className = "topic-select";
    seriesBlock.appendChild(this.seriesSelect);
    this.seriesHost = document.createElement("div");
    this.seriesHost.className = "series-host";
    seriesBlock.appendChild(this.seriesHost);
    this.seriesSelect.addEventListener("change", () => {
      void this.showTimeseries(this.seriesSelect.value);
    });
    window.addEventListener("popstate", (event) => {
      const state = (event as PopStateEvent).state as ViewState | null;
      if (state) {
        this.restoring = true;
        void this.setState(state);
      }
    });
  }

  private section(className: string): HTMLElement {
    const el = document.createElement("div");
    el.className = className;
    this.root.appendChild(el);
    return el;
  }

  async start(): Promise<void> {
    await this.loadMeta();
    this.state = {
      week: this.meta.weeks[0],
      network: this.meta.networks[0],
      cluster: this.meta.clusters[0],
      granularity: this.meta.granularity,
      highlighted: null,
    };
    this.renderSelectors();
    await this.showGraph();
  }

  async loadMeta(): Promise<void> {
    this.meta = await this.api.meta();
    this.renderTopicOptions();
  }

  private renderTopicOptions(): void {
    this.seriesSelect.textContent = "";
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "topic time series...";
    this.seriesSelect.appendChild(placeholder);
    for (const network of Object.keys(this.meta.topics).sort()) {
      for (const topic of this.meta.topics[network]) {
        const option = document.createElement("option");
        option.value = topic;
        option.textContent = topic;
        this.seriesSelect.appendChild(option);
      }
    }
  }

  private renderSelectors(): void {
    this.selectors.textContent = "";
    this.addSelect("week", this.meta.weeks.map(String), String(this.state.week));
    this.addSelect("network", this.meta.networks, this.state.network);
    this.addSelect("cluster", this.meta.clusters, this.state.cluster);
    this.addSelect("granularity", [this.meta.granularity], this.state.granularity);
  }

  private addSelect(name: string, values: string[], current: string): void {
    const label = document.createElement("label");
    label.textContent = name;
    const select = document.createElement("select");
    select.name = name;
    for (const value of values) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      option.selected = value === current;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      const update: Partial<ViewState> =
        name === "week" ? { week: Number(select.value) } : { [name]: select.value };
      void this.setState({ ...this.state, ...update, highlighted: null });
    });
    label.appendChild(select);
    this.selectors.appendChild(label);
  }

  /** Valid-state guard: selections must come from /meta's sets. */
  private validate(state: ViewState): void {
    if (!this.meta.weeks.includes(state.week)) {
      throw new Error(`week ${state.week} not in ${this.meta.weeks}`);
    }
    if (!this.meta.networks.includes(state.network)) {
      throw new Error(`network ${state.network} not in ${this.meta.networks}`);
    }
    if (!this.meta.clusters.includes(state.cluster)) {
      throw new Error(`cluster ${state.cluster} not in ${this.meta.clusters}`);
    }
  }

  async setState(state: ViewState): Promise<void> {
    this.validate(state);
    this.state = state;
    this.renderSelectors();
    await this.showGraph();
  }

  async showGraph(): Promise<void> {
    this.errorHost.textContent = "";
    const { week, network, cluster } = this.state;
    let graph;
    try {
      this.fetchCount += 1;
      graph = await this.api.graph(week, network, cluster);
    } catch (error) {
      if ((error as DOMException).name === "AbortError") return;
      if (error instanceof ApiError && error.status === 404) {
        // stale selectors: refresh the option sets from /meta
        await this.loadMeta();
        this.renderSelectors();
      }
      this.showError(error as Error);
      return;
    }
    if (!this.restoring && this.options.pushHistory !== false) {
      history.pushState(this.state, "", null);
    }
    this.restoring = false;
    renderGraph(this.graphHost, graph, {
      onHoverTopic: (node) => this.showDetail(topicDetail(node), { kind: "topic", id: node.key }),
      onHoverGroup: (node) => this.showDetail(groupDetail(node), { kind: "group", id: String(node.n) }),
      onHoverEdge: (edge) =>
        this.showDetail(edgeDetail(edge), { kind: "edge", id: `${edge.group_n}->${edge.topic_key}` }),
      onLeave: () => {
        this.state = { ...this.state, highlighted: null };
        this.detailHost.textContent = "";
      },
    });
  }

  private showDetail(panel: HTMLElement, highlighted: ViewState["highlighted"]): void {
    this.state = { ...this.state, highlighted };
    this.detailHost.textContent = "";
    this.detailHost.appendChild(panel);
  }

  private showError(error: Error): void {
    this.errorHost.textContent = "";
    const box = document.createElement("div");
    box.className = "error-box";
    const message = document.createElement("p");
    message.textContent = error.message;
    box.appendChild(message);
    const retry = document.createElement("button");
    retry.className = "retry";
    retry.textContent = "retry";
    retry.addEventListener("click", () => void this.showGraph());
    box.appendChild(retry);
    this.errorHost.appendChild(box);
  }

  async showTimeseries(topic: string): Promise<void> {
    if (!topic) {
      this.seriesHost.textContent = "";
      return;
    }
    try {
      const series = await this.api.timeseries(topic);
      renderTimeseries(this.seriesHost, series, this.meta.weeks);
    } catch (error) {
      this.showError(error as Error);
    }
  }
}

export async function mount(
  root: HTMLElement,
  baseUrl: string,
  options: AppOptions = {},
): Promise<App> {
  const app = new App(root, new ApiClient(baseUrl), options);
  await app.start();
  return app;
}
