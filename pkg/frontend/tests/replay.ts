/** Replay fetch: serves a recorded advisor transcript, request by request. */

import type { FetchLike } from "../src/api.js";

export interface RecordedStep {
  observe: number;
  ack: Record<string, unknown>;
  recommendation: Record<string, unknown>;
}

export interface Fixture {
  model: Record<string, unknown>;
  created: { session_id: string } & Record<string, unknown>;
  initial_recommendation: Record<string, unknown>;
  steps: RecordedStep[];
}

export function replayFetch(fixture: Fixture): FetchLike {
  const sid = fixture.created.session_id;
  const queues = new Map<string, Array<{ status: number; body: unknown }>>();
  const push = (key: string, status: number, body: unknown) => {
    if (!queues.has(key)) queues.set(key, []);
    queues.get(key)!.push({ status, body });
  };
  push("POST /session", 201, fixture.created);
  push(`GET /session/${sid}/recommendation`, 200, fixture.initial_recommendation);
  for (const step of fixture.steps) {
    push(`POST /session/${sid}/observe`, 200, step.ack);
    push(`GET /session/${sid}/recommendation`, 200, step.recommendation);
  }
  push(`DELETE /session/${sid}`, 200, { schema_version: 1, deleted: sid });

  return async (url, init) => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const key = `${init?.method ?? "GET"} ${path}`;
    const queue = queues.get(key);
    const next = queue?.shift();
    if (!next) {
      return {
        status: 404,
        json: async () => ({ schema_version: 1, error: `unexpected request ${key}` }),
      };
    }
    return { status: next.status, json: async () => next.body };
  };
}
