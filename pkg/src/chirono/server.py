"""WYSIWIS session hub and its WebSocket transport.

One presenter streams landmark frames, key commands, and config patches in;
every connected client receives the same ordered stream of render diffs
back. The hub itself is transport-free: inputs come through handle() and
outputs land in per-connection outboxes as serialized wire messages, which
makes the whole fan-out path testable without sockets. The WebSocket layer
at the bottom just pumps those queues.

Wire envelope: {"type", "seq", "t_ms", "payload"} with seq numbered from 1
per direction per connection. Inbound types: frame, key, config. Outbound:
render_full, render_diff, event (debug stream, off by default), error.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .charts import SceneDeck, SceneFormatError
from .engine import Engine
from .gestures import ConfigRangeError, GestureConfig
from .ingest import FrameDecoder, FrameGate, NonMonotonicTimestamp, TraceFormatError
from .scenes import TRANSITION_DEFAULT_MS
from .state import canonical_json, diff_states

ROLES = ("presenter", "audience")
OUTBOX_LIMIT_DEFAULT = 64
INBOUND_TYPES = ("frame", "key", "config")


@dataclass
class Connection:
    id: int
    role: str
    outbox: deque = field(default_factory=deque)
    out_seq: int = 0
    last_in_seq: int = 0
    coalesced: int = 0  # times the outbox overflowed and collapsed
    notify: object = None  # optional callable, set by the transport


class SessionHub:
    """Single-session fan-out: engine in the middle, wire queues around it.

    All mutations run on the caller's thread; the transport must serialize
    calls into handle() (the WebSocket layer does this on one event loop).
    """

    def __init__(self, deck: SceneDeck, config: GestureConfig | None = None,
                 transition_ms: int = TRANSITION_DEFAULT_MS,
                 outbox_limit: int = OUTBOX_LIMIT_DEFAULT,
                 debug_events: bool = False,
                 record=None):
        self.config = config or GestureConfig()
        self.engine = Engine(deck, self.config, transition_ms)
        self.decoder = FrameDecoder(confidence_min=self.config.confidence_min,
                                    mirror=self.config.mirror)
        self.gate = FrameGate()
        self.outbox_limit = outbox_limit
        self.debug_events = debug_events
        self.record = record  # callable taking one trace record dict
        self._conns: dict[int, Connection] = {}
        self._next_id = 1
        self._last_state = self.engine.snapshot()

    # ---------- membership ----------

    @property
    def presenter(self) -> Connection | None:
        for c in self._conns.values():
            if c.role == "presenter":
                return c
        return None

    def join(self, role: str) -> tuple[Connection | None, str | None]:
        """Register a client. Returns (connection, None) or (None, reason)."""
        if role not in ROLES:
            return None, "MalformedMessage"
        if role == "presenter" and self.presenter is not None:
            return None, "SecondPresenter"
        conn = Connection(id=self._next_id, role=role)
        self._next_id += 1
        self._conns[conn.id] = conn
        self._send(conn, "render_full", self.engine.t_ms, {
            "state": self._last_state,
            "config": self.engine.config.to_json(),
        })
        return conn, None

    def leave(self, conn: Connection) -> None:
        self._conns.pop(conn.id, None)

    # ---------- inbound ----------

    def handle(self, conn: Connection, raw) -> None:
        """Route one inbound wire message; replies land in outboxes."""
        if isinstance(raw, (str, bytes)):
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError as exc:
                self._error(conn, "MalformedMessage", f"bad JSON: {exc}")
                return
        else:
            msg = raw
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            self._error(conn, "MalformedMessage", "envelope must be an object with a type")
            return
        seq = msg.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool) or seq <= conn.last_in_seq:
            self._error(conn, "MalformedMessage",
                        f"seq must be an integer above {conn.last_in_seq}")
            return
        conn.last_in_seq = seq
        mtype = msg.get("type")
        if mtype not in INBOUND_TYPES:
            self._error(conn, "MalformedMessage", f"unknown inbound type {mtype!r}")
            return
        if conn.role != "presenter":
            self._error(conn, "MalformedMessage", f"audience may not send {mtype!r}")
            return
        payload = msg.get("payload")
        if mtype == "frame":
            self._on_frame(conn, payload)
        elif mtype == "key":
            self._on_key(conn, msg.get("t_ms"), payload)
        else:
            self._on_config(conn, payload)

    def _on_frame(self, conn: Connection, payload) -> None:
        try:
            frame = self.decoder.decode(payload)
        except NonMonotonicTimestamp as exc:
            self._error(conn, "NonMonotonicTimestamp", str(exc))
            return
        except TraceFormatError as exc:
            self._error(conn, "MalformedMessage", str(exc))
            return
        if self.record is not None:
            self.record(payload)
        if frame is None:  # duplicate timestamp, silently deduplicated
            return
        # latest-wins slot between transport and engine; synchronous here,
        # so the offered frame is always the one consumed
        self.gate.offer(frame)
        taken = self.gate.take()
        if taken is None:
            return
        try:
            events = self.engine.on_frame(taken)
        finally:
            self.gate.done()
        if self.debug_events:
            for ev in events:
                self._broadcast("event", ev.t_ms, ev.to_json())
        self._flush_diff(frame.t_ms)

    def _on_key(self, conn: Connection, t_ms, payload) -> None:
        key = payload.get("key") if isinstance(payload, dict) else None
        if not isinstance(key, str) or not isinstance(t_ms, int) or isinstance(t_ms, bool):
            self._error(conn, "MalformedMessage", "key message needs t_ms and payload.key")
            return
        try:
            self.engine.on_key(t_ms, key)
        except ValueError as exc:
            self._error(conn, "MalformedMessage", str(exc))
            return
        if self.record is not None:
            self.record({"t_ms": t_ms, "key": key})
        self._flush_diff(t_ms)

    def _on_config(self, conn: Connection, payload) -> None:
        try:
            cfg = self.engine.config.patched(payload)
        except ConfigRangeError as exc:
            self._error(conn, "ConfigRangeError", str(exc))
            return
        self.engine.configure(cfg)
        self.decoder.confidence_min = cfg.confidence_min
        self.decoder.mirror = cfg.mirror

    # ---------- outbound ----------

    def _flush_diff(self, t_ms: int) -> None:
        new = self.engine.snapshot()
        diff = diff_states(self._last_state, new)
        if diff is None:
            return
        self._last_state = new
        self._broadcast("render_diff", t_ms, {"diff": diff})

    def _broadcast(self, mtype: str, t_ms: int, payload: dict) -> None:
        for conn in self._conns.values():
            self._send(conn, mtype, t_ms, payload)

    def _error(self, conn: Connection, name: str, detail: str) -> None:
        self._send(conn, "error", self.engine.t_ms, {"error": name, "detail": detail})

    def _send(self, conn: Connection, mtype: str, t_ms: int, payload: dict) -> None:
        if len(conn.outbox) >= self.outbox_limit:
            # slow consumer: collapse the backlog into one fresh snapshot;
            # the engine never waits, the client state still converges
            conn.outbox.clear()
            conn.coalesced += 1
            conn.out_seq += 1
            conn.outbox.append(canonical_json({
                "type": "render_full", "seq": conn.out_seq, "t_ms": t_ms,
                "payload": {"state": self._last_state,
                            "config": self.engine.config.to_json()},
            }))
            if mtype in ("render_diff", "render_full"):
                return  # snapshot already covers it
        conn.out_seq += 1
        conn.outbox.append(canonical_json(
            {"type": mtype, "seq": conn.out_seq, "t_ms": t_ms, "payload": payload}))
        if conn.notify is not None:
            conn.notify()


# ---------- WebSocket transport ----------


def build_app(hub: SessionHub):
    """FastAPI app exposing the hub at /ws?role=presenter|audience."""
    import asyncio

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI()
    app.state.hub = hub

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        role = ws.query_params.get("role", "audience")
        await ws.accept()
        conn, reason = hub.join(role)
        if conn is None:
            await ws.send_text(canonical_json({
                "type": "error", "seq": 1, "t_ms": hub.engine.t_ms,
                "payload": {"error": reason, "detail": f"join as {role!r} rejected"}}))
            await ws.close()
            return
        wakeup = asyncio.Event()
        conn.notify = wakeup.set

        async def writer():
            while True:
                while conn.outbox:
                    await ws.send_text(conn.outbox.popleft())
                wakeup.clear()
                if not conn.outbox:
                    await wakeup.wait()

        writer_task = asyncio.create_task(writer())
        try:
            while True:
                text = await ws.receive_text()
                hub.handle(conn, text)
        except WebSocketDisconnect:
            pass
        finally:
            writer_task.cancel()
            hub.leave(conn)

    return app


def serve(scenes_path: str, listen: str, config_path: str | None = None,
          record_path: str | None = None, debug_events: bool = False) -> None:
    """Run the hub behind uvicorn until interrupted."""
    import uvicorn

    from .charts import load_deck

    deck = load_deck(scenes_path)
    config = GestureConfig()
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            config = GestureConfig.from_json(json.load(fh))
    sink = None
    out = None
    if record_path:
        out = open(record_path, "w", encoding="utf-8")
        out.write(json.dumps({"version": 1, "config": config.to_json(),
                              "scene_hash": deck.file_hash}) + "\n")

        def sink(rec):
            out.write(json.dumps(rec, separators=(",", ":")) + "\n")
            out.flush()

    hub = SessionHub(deck, config, record=sink, debug_events=debug_events)
    app = build_app(hub)
    host, _, port = listen.rpartition(":")
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    finally:
        if out is not None:
            out.close()
