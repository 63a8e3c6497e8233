"""Live decode service.

Each client opens one bidirectional channel carrying JSON messages:

    {"type":"hello","screen_mm":[w,h]} -> {"type":"ready","session_id":s,"window":n,"dict_size":k}
    {"type":"touch","x":f,"y":f,"t_ms":u} -> {"type":"decoded","text":str,"revised_from":i}
    {"type":"reset"} -> {"type":"ok"}
    {"type":"bye"} -> {"type":"ok"}
    anything else -> {"type":"error","code":str,"detail":str}

Coordinates are normalized to [0, 1].  The whole current window decode
is returned on every touch because backward recurrence may legitimately
revise earlier characters; revised_from is the lowest changed index
(equal to len(text) when nothing previously shown changed).

The message handling is transport-free (`Channel.handle`) so tests can
drive it directly; `create_app` wraps it in a websocket endpoint.
"""

import time
import uuid
from dataclasses import dataclass

from .model import DecodeState, NeuralDecoder, decode_stream


@dataclass
class Session:
    session_id: str
    state: DecodeState
    screen_mm: tuple[float, float]
    created_at: float


def _error(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}


def revision_point(previous: str, current: str) -> int:
    """Lowest index whose symbol changed; len(current) when none did."""
    for i, (a, b) in enumerate(zip(previous, current)):
        if a != b:
            return i
    # pure append (or pure truncation): splice starts where the shorter ends
    return min(len(previous), len(current))


class Channel:
    """One client connection: at most one session, messages handled in order."""

    def __init__(self, model: NeuralDecoder) -> None:
        self.model = model
        self.session: Session | None = None
        self.closed = False

    def handle(self, message) -> dict:
        if not isinstance(message, dict) or not isinstance(message.get("type"), str):
            return _error("bad-message", "expected an object with a string 'type' field")
        kind = message["type"]
        if kind == "hello":
            return self._hello(message)
        if kind == "touch":
            return self._touch(message)
        if kind == "reset":
            if self.session is None:
                return _error("no-session", "reset before hello")
            self.session.state = DecodeState(window=self.model.config.window)
            return {"type": "ok"}
        if kind == "bye":
            self.session = None
            self.closed = True
            return {"type": "ok"}
        return _error("bad-message", f"unknown message type {kind!r}")

    def _hello(self, message: dict) -> dict:
        screen = message.get("screen_mm")
        if (not isinstance(screen, (list, tuple)) or len(screen) != 2
                or not all(isinstance(v, (int, float)) and v > 0 for v in screen)):
            return _error("bad-message", "hello requires screen_mm: [width, height] > 0")
        self.session = Session(
            session_id=uuid.uuid4().hex,
            state=DecodeState(window=self.model.config.window),
            screen_mm=(float(screen[0]), float(screen[1])),
            created_at=time.time(),
        )
        return {
            "type": "ready",
            "session_id": self.session.session_id,
            "window": self.model.config.window,
            "dict_size": self.model.config.dict_size,
        }

    def _touch(self, message: dict) -> dict:
        if self.session is None:
            return _error("no-session", "touch before hello")
        x, y = message.get("x"), message.get("y")
        ok = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (x, y))
        if not ok or not (-1e-6 <= float(x) <= 1 + 1e-6 and -1e-6 <= float(y) <= 1 + 1e-6):
            return _error("bad-message", "touch requires x, y in [0, 1]")
        t_ms = message.get("t_ms")
        if t_ms is not None and not isinstance(t_ms, (int, float)):
            return _error("bad-message", "t_ms must be a number")
        previous = self.session.state.decoded
        x = min(1.0, max(0.0, float(x)))
        y = min(1.0, max(0.0, float(y)))
        text = decode_stream(self.model, self.session.state, (x, y))
        return {"type": "decoded", "text": text, "revised_from": revision_point(previous, text)}


def create_app(model: NeuralDecoder):
    """FastAPI app exposing the channel protocol at /ws."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI(title="ghosttype decode service")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True, "window": model.config.window}

    @app.websocket("/ws")
    async def ws(socket: WebSocket) -> None:
        await socket.accept()
        channel = Channel(model)
        try:
            while not channel.closed:
                try:
                    message = await socket.receive_json()
                except ValueError:
                    await socket.send_json(_error("bad-message", "frame is not valid JSON"))
                    continue
                await socket.send_json(channel.handle(message))
        except WebSocketDisconnect:
            pass

    return app


def run_server(model: NeuralDecoder, host: str = "127.0.0.1", port: int = 8765) -> None:
    import uvicorn

    uvicorn.run(create_app(model), host=host, port=port, log_level="warning")
