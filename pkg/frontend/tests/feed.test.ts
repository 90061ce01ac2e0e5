import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { LiveFeed } from "../src/feed.js";
import { EventStore } from "../src/store.js";
import { FakeServer, FakeSocket, makeEvent } from "./fakes.js";

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

function harness() {
  const server = new FakeServer();
  const store = new EventStore();
  const api = new ApiClient("http://fake", server.fetchFn);
  const sockets: FakeSocket[] = [];
  const scheduled: (() => void)[] = [];
  const states: string[] = [];
  const feed = new LiveFeed({
    socketFactory: () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      server.socket = socket;
      return socket;
    },
    api,
    store,
    schedule: (fn) => scheduled.push(fn),
    onState: (s) => states.push(s),
  });
  return { server, store, feed, sockets, scheduled, states };
}

describe("live feed", () => {
  it("renders a 10-event broadcast exactly once in seq order across a disconnect", async () => {
    const { server, store, feed, sockets, scheduled } = harness();
    feed.start();
    sockets[0]!.open();
    await flush();

    // events 1-3 arrive live
    for (let seq = 1; seq <= 3; seq++) server.addEvent(makeEvent(seq));
    expect(store.size).toBe(3);

    // connection dies mid-stream; events 4-6 happen while disconnected
    server.socket = null;
    sockets[0]!.drop();
    for (let seq = 4; seq <= 6; seq++) server.addEvent(makeEvent(seq));
    expect(store.size).toBe(3); // not seen yet

    // scheduled reconnect fires; backfill pulls 4-6, then 7-10 arrive live
    expect(scheduled.length).toBe(1);
    scheduled.pop()!();
    sockets[1]!.open();
    await flush();
    for (let seq = 7; seq <= 10; seq++) server.addEvent(makeEvent(seq));

    const seqs = store.list().map((e) => e.seq);
    expect(seqs).toEqual([1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
    const ids = store.list().map((e) => e.event_id);
    expect(new Set(ids).size).toBe(10); // exactly once
  });

  it("backfill overlap does not duplicate events", async () => {
    const { server, store, feed, sockets } = harness();
    // event 1 exists before the dashboard ever connects
    server.addEvent(makeEvent(1), false);
    feed.start();
    sockets[0]!.open();
    await flush();
    expect(store.size).toBe(1);

    // the same event also arrives live (race between backfill and broadcast)
    server.addEvent(makeEvent(1));
    server.addEvent(makeEvent(2));
    expect(store.list().map((e) => e.seq)).toEqual([1, 2]);
  });

  it("reconnect backoff grows exponentially and caps", () => {
    const { feed, sockets, scheduled } = harness();
    feed.start();
    expect(feed.backoffMs()).toBe(500);
    for (let i = 0; i < 10; i++) {
      sockets[sockets.length - 1]!.drop();
      scheduled.pop()!();
    }
    expect(feed.backoffMs()).toBe(30_000);
    sockets[sockets.length - 1]!.open();
    expect(feed.backoffMs()).toBe(500); // reset on successful open
  });

  it("reports connection state transitions", async () => {
    const { feed, sockets, states } = harness();
    feed.start();
    expect(states.at(-1)).toBe("connecting");
    sockets[0]!.open();
    expect(states.at(-1)).toBe("open");
    sockets[0]!.drop();
    expect(states.at(-1)).toBe("closed");
    feed.stop();
  });

  it("ignores undecodable frames", async () => {
    const { store, feed, sockets } = harness();
    feed.start();
    sockets[0]!.open();
    await flush();
    sockets[0]!.onmessage?.({ data: "not json{{" });
    expect(store.size).toBe(0);
  });
});
