"""Bidirectional session service.

A client connects, says hello, configures a technique, then streams gaze (or
pointer-as-gaze) samples; the server runs the detector and pushes interface
state, detector events and page turns back. Frames are newline-free UTF-8
JSON objects, one per transport frame; WebSocket framing serves browser
clients. The protocol logic lives in :class:`GazeSession`, which is
transport-free and fully deterministic, so the wire layer is a thin shell.

Protocol (version 1), client -> server:
  {"kind": "hello", "session_id"?}
  {"kind": "configure", "technique": "hitbox", "config"?: {...}, "record"?}
  {"kind": "sample", "t_ms", "x_px", "y_px", "on_screen"?}
  {"kind": "ping", "t_ms"}                      (echo of a server ping)
server -> client:
  {"kind": "hello", "protocol": 1, "server": "gazescroll/<version>"}
  {"kind": "ui_state", "technique", "page", "progress", "primed",
   "bar_x_px", "scheduled_eta_ms", "diagnostics": {"rtt_ms"?}}
  {"kind": "event", ... serialized detector event ...}
  {"kind": "page", "index", "carried_line", "end_of_document"}
  {"kind": "error", "message", "fatal"}
  {"kind": "ping", "t_ms"}
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from pathlib import Path
from typing import Callable

from . import __version__
from .core import (GazeSample, ScreenGeometry, ScrollCause, ScrollEvent,
                   build_document)
from .session_io import (PageBoundary, SessionHeader, SessionRecording,
                         record_time, record_to_dict, write)
from .stream import StreamConfig, StreamOrderError
from .techniques import (ConfigError, HitboxDetector, Progress, Scheduled,
                         StateChange, Technique, TechniqueConfig, Trigger,
                         make_detector, require_valid)

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
HEARTBEAT_TIMEOUT_S = 2.0

_SCROLL_CAUSE = {
    Technique.EYESWIPE: ScrollCause.EYESWIPE,
    Technique.HITBOX: ScrollCause.HITBOX,
    Technique.MOVING_BAR: ScrollCause.MOVING_BAR,
    Technique.AUTO_SCROLL: ScrollCause.AUTO_SCROLL,
}


class SessionProtocolError(Exception):
    """Fatal protocol violation: the connection should close."""


class GazeSession:
    """Server-side state of one connection: handshake, one active technique,
    detector, document position, optional recording."""

    def __init__(self, geometry: ScreenGeometry = ScreenGeometry(),
                 n_pages: int = 6,
                 clock: Callable[[], float] = time.monotonic,
                 record: bool = False) -> None:
        self._geom = geometry
        self._doc = build_document(geometry, n_pages=n_pages)
        self._clock = clock
        self._record_always = record
        self._hello_done = False
        self._technique: Technique | None = None
        self._detector = None
        self._autoscroll_started = False
        self._pending_boundary = False
        self._config = TechniqueConfig()
        self._stream = StreamConfig(smoothing_window=1)
        self._page = 0
        self._progress = 0.0
        self._primed = False
        self._bar_x = 0.0
        self._eta: float | None = None
        self._rtt_ms: float | None = None
        self._ping_sent_at: float | None = None
        self._published_diag: tuple = (None, False)
        self.recording: SessionRecording | None = None
        self.session_id: str = ""

    # -- outgoing frame builders --

    def _diag_key(self) -> tuple:
        timed_out = (self._ping_sent_at is not None
                     and self._clock() - self._ping_sent_at
                     > HEARTBEAT_TIMEOUT_S)
        return (self._rtt_ms, timed_out)

    def _ui_state(self) -> dict:
        rtt_ms, timed_out = self._diag_key()
        self._published_diag = (rtt_ms, timed_out)
        diagnostics: dict = {}
        if rtt_ms is not None:
            diagnostics["rtt_ms"] = rtt_ms
        if timed_out:
            diagnostics["heartbeat"] = "timeout"
        return {
            "kind": "ui_state",
            "technique": self._technique.value if self._technique else None,
            "page": self._page,
            "progress": self._progress,
            "primed": self._primed,
            "bar_x_px": self._bar_x,
            "scheduled_eta_ms": self._eta,
            "diagnostics": diagnostics,
        }

    @staticmethod
    def _error(message: str, fatal: bool = False) -> dict:
        return {"kind": "error", "message": message, "fatal": fatal}

    def make_ping(self) -> dict:
        self._ping_sent_at = self._clock()
        return {"kind": "ping", "t_ms": self._ping_sent_at * 1000.0}

    # -- incoming frames --

    def handle_frame(self, text: str) -> list[dict]:
        try:
            msg = json.loads(text)
            if not isinstance(msg, dict):
                raise ValueError("frame is not an object")
        except ValueError as e:
            raise SessionProtocolError(f"malformed frame: {e}") from e
        return self.handle_message(msg)

    def handle_message(self, msg: dict) -> list[dict]:
        kind = msg.get("kind")
        if not self._hello_done:
            if kind != "hello":
                raise SessionProtocolError("expected hello first")
            self._hello_done = True
            self.session_id = str(msg.get("session_id", ""))
            return [{"kind": "hello", "protocol": PROTOCOL_VERSION,
                     "server": f"gazescroll/{__version__}",
                     "session_id": self.session_id}]
        if kind == "hello":
            return []  # idempotent for reconnect logic
        if kind == "configure":
            return self._configure(msg)
        if kind == "sample":
            return self._sample(msg)
        if kind == "ping":
            if self._ping_sent_at is not None:
                self._rtt_ms = (self._clock() - self._ping_sent_at) * 1000.0
                self._ping_sent_at = None
            return []
        raise SessionProtocolError(f"unknown frame kind: {kind!r}")

    def _configure(self, msg: dict) -> list[dict]:
        name = msg.get("technique")
        try:
            technique = Technique(name)
        except ValueError:
            return [self._error(f"unknown technique: {name!r}")]
        overrides = msg.get("config", {})
        try:
            cfg = require_valid(self._config_from(overrides))
        except (ConfigError, TypeError) as e:
            return [self._error(f"invalid config: {e}")]
        self._technique = technique
        self._config = cfg
        # window 1 = identity smoothing: the header then describes exactly
        # the pipeline a replay must run to reproduce this session's events
        self._stream = StreamConfig(smoothing_window=1)
        self._detector = make_detector(technique, cfg, self._geom,
                                       self._stream)
        self._autoscroll_started = False
        self._pending_boundary = True
        self._page = 0
        self._progress = 0.0
        self._primed = False
        self._bar_x = getattr(self._detector, "bar_x_px", 0.0)
        self._eta = None
        if self._record_always or msg.get("record"):
            self.recording = SessionRecording(header=SessionHeader(
                geometry=self._geom, technique=technique, config=cfg,
                stream=self._stream))
        # reconfiguration resets detector state: announce the initial state
        initial = {"kind": "event", "t": 0.0, "technique": technique.value,
                   "p": "state", "from": "inactive", "to": "initial"}
        return [initial, self._ui_state()]

    @staticmethod
    def _config_from(overrides: dict) -> TechniqueConfig:
        base = TechniqueConfig()
        fields = set(base.__dataclass_fields__)
        unknown = set(overrides) - fields
        if unknown:
            raise ConfigError([f"unknown config field: {u}" for u in
                               sorted(unknown)])
        if "auto_sample_windows" in overrides:
            overrides = dict(overrides)
            overrides["auto_sample_windows"] = tuple(
                tuple(w) for w in overrides["auto_sample_windows"])
        return base.replace_fields(**overrides)

    def _sample(self, msg: dict) -> list[dict]:
        if self._detector is None:
            return [self._error("no active technique: configure first")]
        try:
            sample = GazeSample(
                t_ms=float(msg["t_ms"]), x_px=float(msg["x_px"]),
                y_px=float(msg["y_px"]),
                on_screen=bool(msg.get("on_screen", True)))
        except (KeyError, TypeError, ValueError) as e:
            raise SessionProtocolError(f"malformed sample: {e}") from e

        # a page boundary is stamped with the first sample of the page, and
        # the implicit detector starts there too: replay sees the same order
        if self._pending_boundary:
            self._pending_boundary = False
            if self.recording is not None:
                self.recording.append(PageBoundary(t_ms=sample.t_ms,
                                                   page_index=self._page))
        if (self._technique is Technique.AUTO_SCROLL
                and not self._autoscroll_started):
            self._autoscroll_started = True
            self._detector.page_started(self._doc.pages[self._page],
                                        sample.t_ms)
        if self.recording is not None:
            self.recording.append(sample)
        try:
            events = self._detector.step(sample)
        except StreamOrderError as e:
            return [self._error(str(e))]

        out: list[dict] = []
        before = (self._progress, self._primed, self._bar_x, self._eta,
                  self._page)
        for event in events:
            if self.recording is not None:
                self.recording.append(event)
            frame = record_to_dict(event)
            frame.pop("k", None)
            out.append({"kind": "event", **frame})
            payload = event.payload
            if isinstance(payload, Progress):
                self._progress = payload.fraction
            elif isinstance(payload, Scheduled):
                self._eta = payload.eta_ms
            elif isinstance(payload, StateChange):
                self._primed = payload.to_state == "primed"
                if payload.to_state in ("reading", "idle", "initial"):
                    self._progress = 0.0
            elif isinstance(payload, Trigger):
                out.extend(self._turn_page(event.t_ms))
        self._bar_x = getattr(self._detector, "bar_x_px", self._bar_x)
        if isinstance(self._detector, HitboxDetector):
            self._progress = self._detector.progress
        after = (self._progress, self._primed, self._bar_x, self._eta,
                 self._page)
        if events or before != after or self._diag_key() != self._published_diag:
            out.append(self._ui_state())
        return out

    def _turn_page(self, t_ms: float) -> list[dict]:
        if self._page + 1 >= self._doc.page_count:
            return [{"kind": "page", "index": self._page,
                     "carried_line": False, "end_of_document": True}]
        frm = self._page
        self._page += 1
        self._progress = 0.0
        self._primed = False
        self._eta = None
        self._autoscroll_started = False  # restarts at the next sample
        self._pending_boundary = True
        if self.recording is not None:
            self.recording.append(ScrollEvent(
                t_ms=t_ms, from_page=frm, to_page=self._page,
                cause=_SCROLL_CAUSE[self._technique]))
        return [{"kind": "page", "index": self._page, "carried_line": True,
                 "end_of_document": False}]

    def finish_recording(self, destination: str | Path) -> None:
        if self.recording is None:
            return
        self.recording.records.sort(key=record_time)
        write(self.recording, destination)


async def _serve_connection(ws, geometry: ScreenGeometry,
                            record_dir: Path | None) -> None:
    session = GazeSession(geometry=geometry, record=record_dir is not None)
    peer = getattr(ws, "remote_address", None)
    log.info("session open: %s", peer)

    async def heartbeat() -> None:
        while True:
            await asyncio.sleep(HEARTBEAT_TIMEOUT_S)
            await ws.send(json.dumps(session.make_ping()))

    beat = asyncio.create_task(heartbeat())
    try:
        async for frame in ws:
            try:
                replies = session.handle_frame(frame)
            except SessionProtocolError as e:
                await ws.send(json.dumps(
                    {"kind": "error", "message": str(e), "fatal": True}))
                break
            for reply in replies:
                await ws.send(json.dumps(reply))
    finally:
        beat.cancel()
        if record_dir is not None and session.recording is not None:
            record_dir.mkdir(parents=True, exist_ok=True)
            name = session.session_id or f"session-{int(time.time())}"
            session.finish_recording(record_dir / f"{name}.session")
        log.info("session closed: %s", peer)


async def serve(host: str = "127.0.0.1", port: int = 8765,
                geometry: ScreenGeometry = ScreenGeometry(),
                record_dir: str | Path | None = None,
                ready: asyncio.Event | None = None) -> None:
    """Run the WebSocket service until cancelled."""
    import websockets

    rdir = Path(record_dir) if record_dir else None

    async def handler(ws):
        await _serve_connection(ws, geometry, rdir)

    async with websockets.serve(handler, host, port) as server:
        actual_port = next(iter(server.sockets)).getsockname()[1]
        print(f"listening on ws://{host}:{actual_port} "
              f"(protocol {PROTOCOL_VERSION})", flush=True)
        if ready is not None:
            ready.set()
        await asyncio.Future()
