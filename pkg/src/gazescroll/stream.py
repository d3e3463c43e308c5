"""Gaze stream conditioning: validity gating, median smoothing and
dispersion-based fixation detection (the dwell unit for everything else)."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .core import GazeSample


class StreamOrderError(ValueError):
    """Timestamps in a gaze stream must be strictly increasing."""


@dataclass(frozen=True, slots=True)
class StreamConfig:
    sample_rate_hz: float = 25.0
    dispersion_px: float = 35.0
    min_fixation_ms: float = 100.0
    smoothing_window: int = 3

    def __post_init__(self) -> None:
        if min(self.sample_rate_hz, self.dispersion_px,
               self.min_fixation_ms) <= 0:
            raise ValueError("stream parameters must be positive")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ValueError("smoothing_window must be a positive odd count")

    @property
    def frame_ms(self) -> float:
        return 1000.0 / self.sample_rate_hz


@dataclass(frozen=True, slots=True)
class Fixation:
    start_ms: float
    end_ms: float
    centroid_x_px: float
    centroid_y_px: float
    sample_count: int

    @property
    def duration_ms(self) -> float:
        return self.end_ms - self.start_ms

    @property
    def mid_ms(self) -> float:
        return (self.start_ms + self.end_ms) / 2.0


def check_order(samples: Sequence[GazeSample]) -> None:
    for a, b in zip(samples, samples[1:]):
        if b.t_ms <= a.t_ms:
            raise StreamOrderError(
                f"non-monotone timestamps: {a.t_ms} then {b.t_ms}")


def smooth(samples: Sequence[GazeSample],
           cfg: StreamConfig = StreamConfig()) -> list[GazeSample]:
    """Per-axis rolling median.

    Off-screen samples pass through unchanged and are excluded from their
    neighbours' windows, so a tracking dropout cannot drag valid samples.
    Windows are truncated at the stream edges.
    """
    check_order(samples)
    half = cfg.smoothing_window // 2
    out: list[GazeSample] = []
    for i, s in enumerate(samples):
        if not s.on_screen:
            out.append(s)
            continue
        lo = max(0, i - half)
        window = [w for w in samples[lo:i + half + 1] if w.on_screen]
        out.append(replace(
            s,
            x_px=statistics.median(w.x_px for w in window),
            y_px=statistics.median(w.y_px for w in window),
        ))
    return out


def _bbox_ok(xs: Sequence[float], ys: Sequence[float], limit: float) -> bool:
    return (max(xs) - min(xs)) <= limit and (max(ys) - min(ys)) <= limit


def detect_fixations(samples: Sequence[GazeSample],
                     cfg: StreamConfig = StreamConfig()) -> list[Fixation]:
    """Dispersion-threshold fixation detection.

    A fixation is a maximal run of on-screen samples whose bounding box stays
    within ``dispersion_px`` on both axes and which spans at least
    ``min_fixation_ms``. Off-screen samples break any open run.
    """
    check_order(samples)
    fixations: list[Fixation] = []
    n = len(samples)
    i = 0
    while i < n:
        if not samples[i].on_screen:
            i += 1
            continue
        xs = [samples[i].x_px]
        ys = [samples[i].y_px]
        j = i
        while j + 1 < n and samples[j + 1].on_screen:
            nx = xs + [samples[j + 1].x_px]
            ny = ys + [samples[j + 1].y_px]
            if not _bbox_ok(nx, ny, cfg.dispersion_px):
                break
            xs, ys = nx, ny
            j += 1
        if samples[j].t_ms - samples[i].t_ms >= cfg.min_fixation_ms:
            fixations.append(Fixation(
                start_ms=samples[i].t_ms,
                end_ms=samples[j].t_ms,
                centroid_x_px=sum(xs) / len(xs),
                centroid_y_px=sum(ys) / len(ys),
                sample_count=j - i + 1,
            ))
            i = j + 1
        else:
            i += 1
    return fixations


@dataclass(frozen=True, slots=True)
class OpenFixation:
    """Live view of an unterminated fixation window."""

    start_ms: float
    age_ms: float
    centroid_x_px: float
    centroid_y_px: float
    sample_count: int


class FixationWindow:
    """Incremental single-window dispersion tracker.

    Feed samples one at a time; the window extends while the bounding box
    holds, and restarts at the incoming sample otherwise. ``feed`` returns
    the open window after the sample is applied (None when the sample is
    rejected by the ``accept`` predicate or off-screen, which closes the
    window immediately).
    """

    def __init__(self, cfg: StreamConfig = StreamConfig(),
                 accept: Callable[[GazeSample], bool] | None = None) -> None:
        self._cfg = cfg
        self._accept = accept
        self._xs: list[float] = []
        self._ys: list[float] = []
        self._start_ms = 0.0
        self._last_ms: float | None = None

    @property
    def open(self) -> bool:
        return bool(self._xs)

    def reset(self) -> None:
        self._xs.clear()
        self._ys.clear()

    def feed(self, s: GazeSample) -> OpenFixation | None:
        if self._last_ms is not None and s.t_ms <= self._last_ms:
            raise StreamOrderError(
                f"non-monotone timestamps: {self._last_ms} then {s.t_ms}")
        self._last_ms = s.t_ms
        if not s.on_screen or (self._accept and not self._accept(s)):
            self.reset()
            return None
        if self._xs and not _bbox_ok(self._xs + [s.x_px],
                                     self._ys + [s.y_px],
                                     self._cfg.dispersion_px):
            self.reset()
        if not self._xs:
            self._start_ms = s.t_ms
        self._xs.append(s.x_px)
        self._ys.append(s.y_px)
        return OpenFixation(
            start_ms=self._start_ms,
            age_ms=s.t_ms - self._start_ms,
            centroid_x_px=sum(self._xs) / len(self._xs),
            centroid_y_px=sum(self._ys) / len(self._ys),
            sample_count=len(self._xs),
        )
