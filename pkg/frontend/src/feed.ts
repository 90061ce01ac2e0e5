// Live feed: WebSocket subscription with reconnect backoff and seq-based
// backfill, so a dropped connection never leaves gaps in the event list.

import type { ApiClient } from "./api.js";
import type { EventStore } from "./store.js";
import type { LiveMessage } from "./types.js";

export type ConnectionState = "connecting" | "open" | "closed";

// The subset of the WebSocket surface the feed uses; fakeable in tests.
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  close(): void;
}

export type SocketFactory = () => SocketLike;
export type Scheduler = (fn: () => void, delayMs: number) => void;

export interface FeedOptions {
  socketFactory: SocketFactory;
  api: ApiClient;
  store: EventStore;
  schedule?: Scheduler;
  backoffBaseMs?: number;
  backoffCapMs?: number;
  onState?: (state: ConnectionState) => void;
}

export class LiveFeed {
  state: ConnectionState = "closed";
  private attempts = 0;
  private stopped = false;
  private socket: SocketLike | null = null;
  private readonly schedule: Scheduler;
  private readonly backoffBaseMs: number;
  private readonly backoffCapMs: number;

  constructor(private options: FeedOptions) {
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.backoffBaseMs = options.backoffBaseMs ?? 500;
    this.backoffCapMs = options.backoffCapMs ?? 30_000;
  }

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
    this.setState("closed");
  }

  backoffMs(): number {
    return Math.min(this.backoffBaseMs * 2 ** this.attempts, this.backoffCapMs);
  }

  private setState(state: ConnectionState): void {
    this.state = state;
    this.options.onState?.(state);
  }

  private connect(): void {
    if (this.stopped) return;
    this.setState("connecting");
    const socket = this.options.socketFactory();
    this.socket = socket;

    socket.onopen = () => {
      this.attempts = 0;
      this.setState("open");
      // catch up on anything missed while disconnected; events carry the
      // log seq, so this is exact
      void this.backfill();
    };
    socket.onmessage = (ev) => {
      let message: LiveMessage;
      try {
        message = JSON.parse(ev.data) as LiveMessage;
      } catch {
        return; // non-JSON frames are dropped
      }
      this.options.store.apply(message);
    };
    socket.onclose = () => {
      if (this.stopped) return;
      this.setState("closed");
      const delay = this.backoffMs();
      this.attempts += 1;
      this.schedule(() => this.connect(), delay);
    };
  }

  private async backfill(): Promise<void> {
    try {
      const since = this.options.store.lastSeq;
      const response = await this.options.api.events(since, 1000);
      this.options.store.backfill(response.events);
    } catch {
      // backfill is retried on the next reconnect; live messages still apply
    }
  }
}
