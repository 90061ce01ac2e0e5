// Thin typed client over the service's HTTP API. fetch is injectable so
// tests can script the server side.

import type {
  EventsResponse,
  EventView,
  ExplainRequest,
  ExplainResponse,
  StatsView,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: { error?: string; detail?: string },
  ) {
    super(`HTTP ${status}: ${body.error ?? "error"} ${body.detail ?? ""}`.trim());
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(resp.status, body);
    }
    return body as T;
  }

  events(sinceSeq = 0, limit = 1000): Promise<EventsResponse> {
    return this.request(`/api/v1/events?since_seq=${sinceSeq}&limit=${limit}`);
  }

  event(eventId: string): Promise<EventView> {
    return this.request(`/api/v1/events/${encodeURIComponent(eventId)}`);
  }

  explain(eventId: string, body: ExplainRequest): Promise<ExplainResponse> {
    return this.request(`/api/v1/events/${encodeURIComponent(eventId)}/explain`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  stats(): Promise<StatsView> {
    return this.request("/api/v1/stats");
  }
}

export function websocketUrl(baseUrl: string): string {
  return baseUrl.replace(/^http/, "ws") + "/api/v1/live";
}
