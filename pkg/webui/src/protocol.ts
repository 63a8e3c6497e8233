// Wire protocol spoken over one websocket per session.  Coordinates are
// normalized to [0, 1].  The server returns the full current window decode
// after every touch; revised_from is the lowest index whose character
// changed (== text.length when nothing already shown did), so clients
// re-render by replacing everything from that index onward.

export interface HelloMsg {
  type: "hello";
  screen_mm: [number, number];
}

export interface TouchMsg {
  type: "touch";
  x: number;
  y: number;
  t_ms: number;
}

export interface ResetMsg {
  type: "reset";
}

export interface ByeMsg {
  type: "bye";
}

export type ClientMsg = HelloMsg | TouchMsg | ResetMsg | ByeMsg;

export interface ReadyReply {
  type: "ready";
  session_id: string;
  window: number;
  dict_size: number;
}

export interface DecodedReply {
  type: "decoded";
  text: string;
  revised_from: number;
}

export interface OkReply {
  type: "ok";
}

export interface ErrorReply {
  type: "error";
  code: string;
  detail: string;
}

export type ServerReply = ReadyReply | DecodedReply | OkReply | ErrorReply;

/** Parse and validate one server frame; throws on anything malformed. */
export function parseReply(raw: string): ServerReply {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error("reply frame is not valid JSON");
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new Error("reply frame is not an object");
  }
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case "ready":
      if (
        typeof msg.session_id === "string" &&
        typeof msg.window === "number" &&
        typeof msg.dict_size === "number"
      ) {
        return {
          type: "ready",
          session_id: msg.session_id,
          window: msg.window,
          dict_size: msg.dict_size,
        };
      }
      break;
    case "decoded":
      if (
        typeof msg.text === "string" &&
        typeof msg.revised_from === "number" &&
        Number.isInteger(msg.revised_from) &&
        msg.revised_from >= 0 &&
        msg.revised_from <= msg.text.length
      ) {
        return { type: "decoded", text: msg.text, revised_from: msg.revised_from };
      }
      break;
    case "ok":
      return { type: "ok" };
    case "error":
      if (typeof msg.code === "string" && typeof msg.detail === "string") {
        return { type: "error", code: msg.code, detail: msg.detail };
      }
      break;
  }
  throw new Error(`malformed reply: ${raw.slice(0, 120)}`);
}

/**
 * Apply one decoded reply to the currently shown text.
 *
 * Everything before revised_from is guaranteed unchanged by the server,
 * so the result always equals the server's text exactly.
 */
export function splice(shown: string, reply: DecodedReply): string {
  return shown.slice(0, reply.revised_from) + reply.text.slice(reply.revised_from);
}
