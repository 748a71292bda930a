import type { GraphDocument, Meta, TopicSeries } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly valid?: unknown,
  ) {
    super(message);
  }
}

/**
 * Thin client for the read-only /v1 API.
 *
 * Graph fetches are latest-wins: starting a new one aborts the in-flight
 * request, so a burst of selector changes settles on the last selection.
 */
export class ApiClient {
  private graphController: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string, signal?: AbortSignal): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, { signal });
    } catch (error) {
      if ((error as DOMException).name === "AbortError") throw error;
      throw new ApiError(`service unreachable: ${String(error)}`, 0);
    }
    const body = await response.text();
    if (!response.ok) {
      let valid: unknown;
      let message = `HTTP ${response.status}`;
      try {
        const payload = JSON.parse(body) as { error?: string; valid?: unknown };
        if (payload.error) message = payload.error;
        valid = payload.valid;
      } catch {
        // non-JSON error body: keep the generic message
      }
      throw new ApiError(message, response.status, valid);
    }
    return JSON.parse(body) as T;
  }

  meta(): Promise<Meta> {
    return this.getJson<Meta>("/meta");
  }

  graph(week: number, network: string, cluster: string): Promise<GraphDocument> {
    this.graphController?.abort();
    this.graphController = new AbortController();
    const query = `week=${week}&network=${encodeURIComponent(network)}&cluster=${encodeURIComponent(cluster)}`;
    return this.getJson<GraphDocument>(`/graph?${query}`, this.graphController.signal);
  }

  timeseries(topic: string): Promise<TopicSeries> {
    return this.getJson<TopicSeries>(`/timeseries?topic=${encodeURIComponent(topic)}`);
  }
}
