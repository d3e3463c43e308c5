"""Persistent session format, recording and timestamp-faithful replay.

Line-delimited UTF-8 text: a magic header line carrying the format version
and a JSON header object, then one JSON record per line in time order.
Serialization is canonical (sorted keys, shortest round-tripping floats), so
write -> read -> write is byte-identical. Records at equal timestamps keep
their insertion order; a sample always precedes the events it caused.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .core import (GazeSample, SampleKind, ScreenGeometry, ScrollCause,
                   ScrollEvent)
from .simulate import GestureAnnotation
from .stream import StreamConfig
from .techniques import (Abort, DetectorEvent, Payload, Progress, Scheduled,
                         StateChange, Technique, TechniqueConfig, Trigger)

MAGIC = "#gazescroll-session"
FORMAT_VERSION = 1


class SessionFormatError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class PageBoundary:
    t_ms: float
    page_index: int


Record = GazeSample | DetectorEvent | ScrollEvent | PageBoundary | GestureAnnotation


def record_time(r: Record) -> float:
    if isinstance(r, GestureAnnotation):
        return r.start_ms
    return r.t_ms


@dataclass(frozen=True, slots=True)
class SessionHeader:
    geometry: ScreenGeometry = ScreenGeometry()
    technique: Technique | None = None
    config: TechniqueConfig = TechniqueConfig()
    stream: StreamConfig = StreamConfig()
    noise_label: str = "none"
    latency_label: str = "none"
    seed: int = 0
    calibrator: dict | None = None
    version: int = FORMAT_VERSION


@dataclass
class SessionRecording:
    header: SessionHeader
    records: list[Record] = field(default_factory=list)

    def append(self, r: Record) -> None:
        self.records.append(r)

    def samples(self) -> list[GazeSample]:
        return [r for r in self.records if isinstance(r, GazeSample)]

    def events(self) -> list[DetectorEvent]:
        return [r for r in self.records if isinstance(r, DetectorEvent)]

    def scrolls(self) -> list[ScrollEvent]:
        return [r for r in self.records if isinstance(r, ScrollEvent)]

    def annotations(self) -> list[GestureAnnotation]:
        return [r for r in self.records if isinstance(r, GestureAnnotation)]

    def page_boundaries(self) -> list[PageBoundary]:
        return [r for r in self.records if isinstance(r, PageBoundary)]


# --- serialization ---------------------------------------------------------

def _payload_to_dict(p: Payload) -> dict:
    if isinstance(p, StateChange):
        return {"p": "state", "from": p.from_state, "to": p.to_state}
    if isinstance(p, Progress):
        return {"p": "progress", "fraction": p.fraction}
    if isinstance(p, Trigger):
        return {"p": "trigger"}
    if isinstance(p, Abort):
        return {"p": "abort", "reason": p.reason}
    if isinstance(p, Scheduled):
        return {"p": "scheduled", "eta_ms": p.eta_ms}
    raise TypeError(f"unknown payload: {p!r}")


def _payload_from_dict(d: dict) -> Payload:
    kind = d["p"]
    if kind == "state":
        return StateChange(d["from"], d["to"])
    if kind == "progress":
        return Progress(d["fraction"])
    if kind == "trigger":
        return Trigger()
    if kind == "abort":
        return Abort(d["reason"])
    if kind == "scheduled":
        return Scheduled(d["eta_ms"])
    raise SessionFormatError(f"unknown event payload kind: {kind!r}")


def record_to_dict(r: Record) -> dict:
    if isinstance(r, GazeSample):
        return {"k": "sample", "t": r.t_ms, "x": r.x_px, "y": r.y_px,
                "on": r.on_screen, "kind": r.kind.value}
    if isinstance(r, DetectorEvent):
        return {"k": "event", "t": r.t_ms, "technique": r.technique.value,
                **_payload_to_dict(r.payload)}
    if isinstance(r, ScrollEvent):
        return {"k": "scroll", "t": r.t_ms, "from": r.from_page,
                "to": r.to_page, "cause": r.cause.value}
    if isinstance(r, PageBoundary):
        return {"k": "page", "t": r.t_ms, "index": r.page_index}
    if isinstance(r, GestureAnnotation):
        return {"k": "gesture", "technique": r.technique.value,
                "start": r.start_ms, "complete": r.complete_ms,
                "window": r.match_window_ms}
    raise TypeError(f"unknown record: {r!r}")


def record_from_dict(d: dict) -> Record | None:
    kind = d.get("k")
    if kind == "sample":
        return GazeSample(t_ms=d["t"], x_px=d["x"], y_px=d["y"],
                          on_screen=d["on"], kind=SampleKind(d["kind"]))
    if kind == "event":
        return DetectorEvent(t_ms=d["t"], technique=Technique(d["technique"]),
                             payload=_payload_from_dict(d))
    if kind == "scroll":
        return ScrollEvent(t_ms=d["t"], from_page=d["from"], to_page=d["to"],
                           cause=ScrollCause(d["cause"]))
    if kind == "page":
        return PageBoundary(t_ms=d["t"], page_index=d["index"])
    if kind == "gesture":
        return GestureAnnotation(technique=Technique(d["technique"]),
                                 start_ms=d["start"], complete_ms=d["complete"],
                                 match_window_ms=d["window"])
    return None  # unknown kind: caller counts and skips


def _header_to_dict(h: SessionHeader) -> dict:
    g = h.geometry
    s = h.stream
    return {
        "geometry": {"width_px": g.width_px, "height_px": g.height_px,
                     "top_bar_px": g.top_bar_px,
                     "bottom_bar_px": g.bottom_bar_px,
                     "px_per_cm": g.px_per_cm},
        "technique": h.technique.value if h.technique else None,
        "config": {k: (list(map(list, v)) if k == "auto_sample_windows" else v)
                   for k, v in vars_of_config(h.config).items()},
        "stream": {"sample_rate_hz": s.sample_rate_hz,
                   "dispersion_px": s.dispersion_px,
                   "min_fixation_ms": s.min_fixation_ms,
                   "smoothing_window": s.smoothing_window},
        "noise_label": h.noise_label,
        "latency_label": h.latency_label,
        "seed": h.seed,
        "calibrator": h.calibrator,
    }


def vars_of_config(cfg: TechniqueConfig) -> dict:
    return {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}


def config_from_dict(d: dict) -> TechniqueConfig:
    d = dict(d)
    if "auto_sample_windows" in d:
        d["auto_sample_windows"] = tuple(
            tuple(w) for w in d["auto_sample_windows"])
    return TechniqueConfig(**d)


def _header_from_dict(d: dict, version: int) -> SessionHeader:
    return SessionHeader(
        geometry=ScreenGeometry(**d["geometry"]),
        technique=Technique(d["technique"]) if d.get("technique") else None,
        config=config_from_dict(d["config"]),
        stream=StreamConfig(**d["stream"]) if "stream" in d else StreamConfig(),
        noise_label=d.get("noise_label", "none"),
        latency_label=d.get("latency_label", "none"),
        seed=d.get("seed", 0),
        calibrator=d.get("calibrator"),
        version=version,
    )


def dumps_line(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def write(recording: SessionRecording, destination: str | Path) -> None:
    """Write a recording; refuses out-of-order records before touching the
    file."""
    times = [record_time(r) for r in recording.records]
    for i, (a, b) in enumerate(zip(times, times[1:])):
        if b < a:
            raise SessionFormatError(
                f"records out of order at position {i + 1}: {b} after {a}")
    path = Path(destination)
    lines = [f"{MAGIC} {FORMAT_VERSION} "
             f"{dumps_line(_header_to_dict(recording.header))}"]
    lines += [dumps_line(record_to_dict(r)) for r in recording.records]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write session to {path}: {e}") from e


def read(source: str | Path) -> tuple[SessionRecording, int]:
    """Read and validate a session file. Returns the recording and the count
    of skipped unknown-kind records."""
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot read session from {path}: {e}") from e
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise SessionFormatError(f"{path}: missing {MAGIC} header")
    rest = lines[0][len(MAGIC) + 1:]
    ver_str, _, header_json = rest.partition(" ")
    try:
        version = int(ver_str)
    except ValueError as e:
        raise SessionFormatError(f"{path}: bad version {ver_str!r}") from e
    if version > FORMAT_VERSION:
        raise SessionFormatError(
            f"{path}: format version {version} is newer than supported "
            f"{FORMAT_VERSION}")
    try:
        header = _header_from_dict(json.loads(header_json), version)
    except (KeyError, ValueError) as e:
        raise SessionFormatError(f"{path}: malformed header: {e}") from e

    recording = SessionRecording(header=header)
    skipped = 0
    last_t: float | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            record = record_from_dict(d)
        except (KeyError, ValueError, TypeError) as e:
            raise SessionFormatError(
                f"{path}: malformed record on line {lineno}: {e}") from e
        if record is None:
            skipped += 1
            continue
        t = record_time(record)
        if last_t is not None and t < last_t:
            raise SessionFormatError(
                f"{path}: non-monotone timestamp on line {lineno}")
        last_t = t
        recording.append(record)
    return recording, skipped


def replay(recording: SessionRecording, speed_factor: float = 0.0,
           sleep: Callable[[float], None] = time.sleep,
           ) -> Iterator[GazeSample]:
    """Yield the recorded samples preserving inter-sample gaps scaled by
    1/speed_factor; a factor of 0 replays as fast as possible."""
    if speed_factor < 0:
        raise ValueError("speed_factor must be >= 0")
    prev_t: float | None = None
    for s in recording.samples():
        if speed_factor > 0 and prev_t is not None:
            sleep((s.t_ms - prev_t) / 1000.0 / speed_factor)
        prev_t = s.t_ms
        yield s


def diff_events(a: Sequence[DetectorEvent],
                b: Sequence[DetectorEvent]) -> str | None:
    """First divergence between two event logs, or None when identical."""
    for i, (ea, eb) in enumerate(zip(a, b)):
        if ea != eb:
            return f"events diverge at index {i}: {ea} != {eb}"
    if len(a) != len(b):
        return (f"event counts differ: {len(a)} != {len(b)} "
                f"(first extra at index {min(len(a), len(b))})")
    return None


def import_samples(source: str | Path, column_map: dict[str, str],
                   t_scale: float = 1.0) -> list[GazeSample]:
    """CSV import shim for externally recorded gaze data.

    ``column_map`` names the source columns for "t_ms", "x_px" and "y_px"
    (optionally "on_screen"); ``t_scale`` converts the source time unit to
    milliseconds (e.g. 1000 for seconds).
    """
    for needed in ("t_ms", "x_px", "y_px"):
        if needed not in column_map:
            raise ValueError(f"column_map must map {needed!r}")
    samples = []
    with open(source, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            on = True
            if "on_screen" in column_map:
                on = str(row[column_map["on_screen"]]).strip().lower() in (
                    "1", "true", "yes")
            samples.append(GazeSample(
                t_ms=float(row[column_map["t_ms"]]) * t_scale,
                x_px=float(row[column_map["x_px"]]),
                y_px=float(row[column_map["y_px"]]),
                on_screen=on))
    return samples
