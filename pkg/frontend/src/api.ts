/** Thin client for the advisor protocol; the fetch function is injectable
 * so tests can replay recorded transcripts without a network. */

import type { ModelSpec, ObserveAck, Recommendation, SessionCreated } from "./types.js";

export interface FetchResponseLike {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponseLike>;

export class AdvisorApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export class AdvisorApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: FetchResponseLike;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new AdvisorApiError(`advisor service unreachable: ${String(err)}`, 0);
    }
    const payload = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      const message = typeof payload.error === "string" ? payload.error : `HTTP ${response.status}`;
      throw new AdvisorApiError(message, response.status);
    }
    return payload as T;
  }

  createSession(model: ModelSpec): Promise<SessionCreated> {
    return this.request<SessionCreated>("POST", "/session", {
      schema_version: 1,
      model,
    });
  }

  observe(sessionId: string, value: 0 | 1): Promise<ObserveAck> {
    return this.request<ObserveAck>("POST", `/session/${sessionId}/observe`, { value });
  }

  recommendation(sessionId: string): Promise<Recommendation> {
    return this.request<Recommendation>("GET", `/session/${sessionId}/recommendation`);
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request("DELETE", `/session/${sessionId}`);
  }
}
