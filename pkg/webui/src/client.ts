import { parseReply, splice } from "./protocol.js";
import type { ClientMsg, ServerReply } from "./protocol.js";

/** Anything that can carry JSON frames to the server (a websocket, a fake). */
export interface Transport {
  send(data: string): void;
  close(): void;
}

export type ClientStatus = "idle" | "joining" | "live" | "closed";

export interface ClientHooks {
  /** Called after any observable state change; drive rendering from here. */
  onChange?(client: SessionClient): void;
  onError?(code: string, detail: string): void;
}

/**
 * One decode session: runs the handshake, keeps the rendered text in sync
 * by splicing decoded replies, and ignores frames from transports that
 * have since been replaced (a reconnect bumps the epoch).
 */
export class SessionClient {
  status: ClientStatus = "idle";
  sessionId = "";
  window = 0;
  dictSize = 0;
  text = "";
  lastError = "";

  private transport: Transport | null = null;
  private epoch = 0;

  constructor(private hooks: ClientHooks = {}) {}

  /** Bind a fresh transport; tag its incoming frames with the returned epoch. */
  attach(transport: Transport): number {
    this.transport = transport;
    this.status = "idle";
    this.sessionId = "";
    this.text = "";
    this.lastError = "";
    this.epoch += 1;
    this.changed();
    return this.epoch;
  }

  hello(screenMm: [number, number]): void {
    if (this.transport === null) throw new Error("no transport attached");
    this.status = "joining";
    this.send({ type: "hello", screen_mm: screenMm });
    this.changed();
  }

  /** Send one keystroke; false (and nothing sent) without a live session. */
  touch(x: number, y: number, tMs: number): boolean {
    if (this.status !== "live") return false;
    this.send({ type: "touch", x, y, t_ms: Math.round(tMs) });
    return true;
  }

  /** Clear the server-side window and the local text. */
  reset(): void {
    if (this.status !== "live") return;
    this.text = "";
    this.send({ type: "reset" });
    this.changed();
  }

  bye(): void {
    if (this.status === "live") this.send({ type: "bye" });
    this.status = "closed";
    this.transport?.close();
    this.transport = null;
    this.changed();
  }

  /** The transport dropped underneath us (server gone, network cut). */
  dropped(epoch: number): void {
    if (epoch !== this.epoch) return;
    this.status = "closed";
    this.transport = null;
    this.changed();
  }

  /** Feed one raw frame; the epoch must be the one attach() returned. */
  handleRaw(raw: string, epoch: number): void {
    if (epoch !== this.epoch) return; // stale connection, drop silently
    let reply: ServerReply;
    try {
      reply = parseReply(raw);
    } catch (err) {
      this.lastError = String(err);
      this.hooks.onError?.("client-parse", String(err));
      return;
    }
    this.apply(reply);
  }

  private apply(reply: ServerReply): void {
    switch (reply.type) {
      case "ready":
        this.sessionId = reply.session_id;
        this.window = reply.window;
        this.dictSize = reply.dict_size;
        this.status = "live";
        this.text = "";
        break;
      case "decoded":
        this.text = splice(this.text, reply);
        break;
      case "ok":
        break;
      case "error":
        this.lastError = `${reply.code}: ${reply.detail}`;
        this.hooks.onError?.(reply.code, reply.detail);
        break;
    }
    this.changed();
  }

  private send(msg: ClientMsg): void {
    this.transport?.send(JSON.stringify(msg));
  }

  private changed(): void {
    this.hooks.onChange?.(this);
  }
}
