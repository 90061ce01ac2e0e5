// Explain controls: the operator picks experience level and descriptiveness,
// the dashboard POSTs /events/{id}/explain and keeps a per-event history of
// results keyed by prompt hash.

import { ApiClient, ApiError } from "./api.js";
import type { EventStore } from "./store.js";
import type { Descriptiveness, ExperienceLevel, ExplainResponse } from "./types.js";

export interface ExplainOutcome {
  ok: boolean;
  pendingAttribution?: boolean;
  result?: ExplainResponse;
  message?: string;
}

export class ExplainControls {
  /** per event: every result received, newest last; history survives re-requests */
  history = new Map<string, ExplainResponse[]>();

  constructor(
    private api: ApiClient,
    private store: EventStore,
  ) {}

  async request(
    eventId: string,
    level: ExperienceLevel,
    style: Descriptiveness,
  ): Promise<ExplainOutcome> {
    try {
      const result = await this.api.explain(eventId, {
        experience_level: level,
        descriptiveness: style,
      });
      const log = this.history.get(eventId) ?? [];
      log.push(result);
      this.history.set(eventId, log);
      this.store.patchExplanation(eventId, {
        text: result.text,
        provider: result.provider,
        model_name: result.model_name,
        prompt_hash: result.prompt_hash,
        latency_ms: result.latency_ms,
        created_at: result.created_at,
        attempts: result.attempts,
        error: result.error,
        prompt: result.prompt,
        experience_level: level,
        descriptiveness: style,
      });
      return { ok: true, result };
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        return { ok: false, pendingAttribution: true, message: "attribution pending" };
      }
      return { ok: false, message: e instanceof Error ? e.message : String(e) };
    }
  }

  hashesFor(eventId: string): string[] {
    return (this.history.get(eventId) ?? []).map((r) => r.prompt_hash);
  }
}
