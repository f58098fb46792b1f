/** Session state machine: append-only timeline, serialized requests.
 *
 * The controller never computes thresholds or probabilities itself; the
 * recommendation on display is always the service's response, verbatim.
 * Requests for a session run strictly one at a time (a promise chain), so
 * observations cannot arrive out of order.
 */

import { AdvisorApi, AdvisorApiError } from "./api.js";
import type {
  ModelSpec,
  Recommendation,
  SessionCreated,
  TimelineEntry,
} from "./types.js";

export interface SessionView {
  sessionId: string | null;
  created: SessionCreated | null;
  timeline: readonly TimelineEntry[];
  recommendation: Recommendation | null;
  error: string | null;
  finished: boolean;
}

export class SessionController {
  private sessionId: string | null = null;
  private created: SessionCreated | null = null;
  private timeline: TimelineEntry[] = [];
  private recommendation: Recommendation | null = null;
  private error: string | null = null;
  private queue: Promise<void> = Promise.resolve();

  constructor(private readonly api: AdvisorApi) {}

  get view(): SessionView {
    const horizon = this.created?.model.n ?? Infinity;
    return {
      sessionId: this.sessionId,
      created: this.created,
      timeline: [...this.timeline],
      recommendation: this.recommendation,
      error: this.error,
      finished: this.timeline.length >= horizon,
    };
  }

  /** Serialize request work; failures land in `error`, state untouched. */
  private enqueue(work: () => Promise<void>): Promise<SessionView> {
    this.queue = this.queue.then(async () => {
      this.error = null;
      try {
        await work();
      } catch (err) {
        this.error = err instanceof AdvisorApiError ? err.message : String(err);
      }
    });
    return this.queue.then(() => this.view);
  }

  configure(model: ModelSpec): Promise<SessionView> {
    return this.enqueue(async () => {
      const created = await this.api.createSession(model);
      const recommendation = await this.api.recommendation(created.session_id);
      // no partial sessions: commit state only after both calls succeed
      this.sessionId = created.session_id;
      this.created = created;
      this.timeline = [];
      this.recommendation = recommendation;
    });
  }

  recordObservation(value: 0 | 1): Promise<SessionView> {
    return this.enqueue(async () => {
      if (this.sessionId === null) {
        throw new AdvisorApiError("no active session", 0);
      }
      const ack = await this.api.observe(this.sessionId, value);
      const recommendation = await this.api.recommendation(this.sessionId);
      this.timeline.push({ index: ack.index, value: ack.value, recommendation });
      this.recommendation = recommendation;
    });
  }

  discard(): Promise<SessionView> {
    return this.enqueue(async () => {
      if (this.sessionId !== null) {
        await this.api.deleteSession(this.sessionId);
      }
      this.sessionId = null;
      this.created = null;
      this.timeline = [];
      this.recommendation = null;
    });
  }
}
