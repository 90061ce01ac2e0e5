// Dashboard state: seq-ordered event ring, folded live updates, stats.
// Pure data; rendering subscribes to change notifications.

import type { AttributionView, EventView, ExplanationView, LiveMessage, StatsView } from "./types.js";

export const RING_CAPACITY = 5000;

export type StoreListener = () => void;

export class EventStore {
  private events = new Map<string, EventView>(); // event_id -> view
  private order: string[] = []; // event ids sorted by seq ascending
  private listeners = new Set<StoreListener>();
  lastSeq = 0; // highest event (log) seq seen; reconnect backfills from here
  stats: Partial<StatsView> = {};
  alerts: Record<string, unknown>[] = [];
  selectedId: string | null = null;

  constructor(private capacity: number = RING_CAPACITY) {}

  subscribe(listener: StoreListener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  list(): EventView[] {
    return this.order.map((id) => this.events.get(id)!);
  }

  get(eventId: string): EventView | undefined {
    return this.events.get(eventId);
  }

  get size(): number {
    return this.order.length;
  }

  /** Insert or refresh one event view; duplicates (by id) merge in place. */
  upsert(view: EventView): void {
    const existing = this.events.get(view.event_id);
    if (existing) {
      this.events.set(view.event_id, { ...existing, ...view });
    } else {
      this.events.set(view.event_id, view);
      const at = lowerBound(this.order, (id) => this.events.get(id)!.seq, view.seq);
      this.order.splice(at, 0, view.event_id);
      while (this.order.length > this.capacity) {
        const dropped = this.order.shift()!;
        this.events.delete(dropped);
        if (this.selectedId === dropped) this.selectedId = null;
      }
    }
    if (view.seq > this.lastSeq) this.lastSeq = view.seq;
    this.notify();
  }

  backfill(views: EventView[]): void {
    for (const view of views) this.upsert(view);
  }

  patchAttribution(eventId: string, attribution: AttributionView): void {
    const view = this.events.get(eventId);
    if (!view) return;
    this.events.set(eventId, { ...view, attribution });
    this.notify();
  }

  patchExplanation(eventId: string, explanation: ExplanationView): void {
    const view = this.events.get(eventId);
    if (!view) return;
    this.events.set(eventId, { ...view, explanation });
    this.notify();
  }

  select(eventId: string | null): void {
    this.selectedId = eventId;
    this.notify();
  }

  selected(): EventView | undefined {
    return this.selectedId ? this.events.get(this.selectedId) : undefined;
  }

  /** Fold one live message into the state. Display-only: numbers arrive
   *  from the service and are never recomputed here. */
  apply(message: LiveMessage): void {
    switch (message.type) {
      case "detection":
        this.upsert(message.payload as unknown as EventView);
        break;
      case "attribution_update":
        this.patchAttribution(
          message.payload["event_id"] as string,
          message.payload["attribution"] as AttributionView,
        );
        break;
      case "explanation_update":
        this.patchExplanation(
          message.payload["event_id"] as string,
          message.payload["explanation"] as ExplanationView,
        );
        break;
      case "alert":
        this.alerts.push(message.payload);
        if (this.alerts.length > 200) this.alerts.shift();
        this.notify();
        break;
      case "stats":
        this.stats = message.payload as Partial<StatsView>;
        this.notify();
        break;
    }
  }
}

function lowerBound(ids: string[], seqOf: (id: string) => number, seq: number): number {
  let lo = 0;
  let hi = ids.length;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (seqOf(ids[mid]!) < seq) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}
