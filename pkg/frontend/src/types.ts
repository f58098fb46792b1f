/** Advisor protocol payloads, mirrored from the service's JSON bodies. */

export type ModelSpec =
  | { kind: "secretary"; n: number }
  | { kind: "dice"; n: number; faces: number }
  | { kind: "explicit-odds"; probs: number[] }
  | { kind: "empirical"; n: number };

export interface ModelSummary {
  kind: string;
  n: number;
  threshold?: number;
  optimal_value?: number;
}

export interface SessionCreated {
  schema_version: number;
  session_id: string;
  model: ModelSummary;
}

export interface ObserveAck {
  schema_version: number;
  index: number;
  value: number;
}

export interface Recommendation {
  schema_version: number;
  action: "stop" | "continue";
  threshold: number;
  index: number;
  win_if_stop: number | null;
  win_if_continue_estimate: number;
}

export interface TimelineEntry {
  index: number;
  value: number;
  recommendation: Recommendation;
}

export interface ApiErrorBody {
  schema_version: number;
  error: string;
}
