import { expect, test } from "vitest";

import { SessionClient } from "../src/client.js";
import type { Transport } from "../src/client.js";

class Recorder implements Transport {
  sent: string[] = [];
  closed = false;
  send(data: string): void {
    this.sent.push(data);
  }
  close(): void {
    this.closed = true;
  }
}

const READY = '{"type":"ready","session_id":"s1","window":8,"dict_size":31}';

function liveClient(): { client: SessionClient; transport: Recorder; epoch: number } {
  const client = new SessionClient();
  const transport = new Recorder();
  const epoch = client.attach(transport);
  client.hello([555, 338]);
  client.handleRaw(READY, epoch);
  return { client, transport, epoch };
}

test("touch before the handshake sends nothing", () => {
  const client = new SessionClient();
  const transport = new Recorder();
  client.attach(transport);
  expect(client.touch(0.5, 0.5, 0)).toBe(false);
  expect(transport.sent).toEqual([]);
});

test("handshake then touches, in order", () => {
  const { client, transport, epoch } = liveClient();
  expect(client.status).toBe("live");
  client.touch(0.25, 0.75, 123.4);
  client.handleRaw('{"type":"decoded","text":"a","revised_from":0}', epoch);
  expect(transport.sent.map((d) => JSON.parse(d).type)).toEqual(["hello", "touch"]);
  expect(JSON.parse(transport.sent[1])).toEqual({
    type: "touch",
    x: 0.25,
    y: 0.75,
    t_ms: 123,
  });
  expect(client.text).toBe("a");
});

test("frames from a replaced transport are dropped", () => {
  const client = new SessionClient();
  const stale = new Recorder();
  const staleEpoch = client.attach(stale);
  client.hello([100, 100]);
  client.handleRaw(READY, staleEpoch);
  client.handleRaw('{"type":"decoded","text":"old","revised_from":0}', staleEpoch);
  expect(client.text).toBe("old");

  const fresh = new Recorder();
  const freshEpoch = client.attach(fresh);
  expect(client.text).toBe("");
  client.hello([100, 100]);
  client.handleRaw(READY, freshEpoch);

  // a late frame from the abandoned socket must not corrupt the display
  client.handleRaw('{"type":"decoded","text":"zzz","revised_from":0}', staleEpoch);
  expect(client.text).toBe("");
});

test("server errors are surfaced without touching the text", () => {
  const errors: string[] = [];
  const client = new SessionClient({ onError: (code) => errors.push(code) });
  const transport = new Recorder();
  const epoch = client.attach(transport);
  client.hello([100, 100]);
  client.handleRaw(READY, epoch);
  client.handleRaw('{"type":"decoded","text":"hi","revised_from":0}', epoch);
  client.handleRaw('{"type":"error","code":"bad-message","detail":"nope"}', epoch);
  expect(errors).toEqual(["bad-message"]);
  expect(client.lastError).toBe("bad-message: nope");
  expect(client.text).toBe("hi");
  expect(client.status).toBe("live");
});

test("unparseable frames report client-parse", () => {
  const errors: string[] = [];
  const client = new SessionClient({ onError: (code) => errors.push(code) });
  const transport = new Recorder();
  const epoch = client.attach(transport);
  client.hello([100, 100]);
  client.handleRaw("garbage", epoch);
  expect(errors).toEqual(["client-parse"]);
  expect(client.lastError).toContain("not valid JSON");
});

test("reset clears the display immediately", () => {
  const { client, transport, epoch } = liveClient();
  client.handleRaw('{"type":"decoded","text":"abc","revised_from":0}', epoch);
  client.reset();
  expect(client.text).toBe("");
  expect(JSON.parse(transport.sent[1])).toEqual({ type: "reset" });
  client.handleRaw('{"type":"ok"}', epoch);
  expect(client.text).toBe("");
});

test("bye says goodbye and closes the transport", () => {
  const { client, transport } = liveClient();
  client.bye();
  expect(client.status).toBe("closed");
  expect(transport.closed).toBe(true);
  expect(JSON.parse(transport.sent[1])).toEqual({ type: "bye" });
  expect(client.touch(0.1, 0.1, 0)).toBe(false);
});

test("a dropped transport closes the session", () => {
  const { client, epoch } = liveClient();
  client.dropped(epoch);
  expect(client.status).toBe("closed");
  // but a stale drop notification is ignored
  const fresh = new Recorder();
  const freshEpoch = client.attach(fresh);
  client.hello([100, 100]);
  client.handleRaw(READY, freshEpoch);
  client.dropped(epoch);
  expect(client.status).toBe("live");
});

test("change hook fires on every observable update", () => {
  let calls = 0;
  const client = new SessionClient({ onChange: () => (calls += 1) });
  const transport = new Recorder();
  const epoch = client.attach(transport); // 1
  client.hello([100, 100]); // 2
  client.handleRaw(READY, epoch); // 3
  client.touch(0.5, 0.5, 0); // touches do not change state themselves
  client.handleRaw('{"type":"decoded","text":"a","revised_from":0}', epoch); // 4
  expect(calls).toBe(4);
});
