"""The four scrolling-technique detectors as deterministic state machines.

Every detector consumes timestamped gaze samples in arrival order and emits
DetectorEvents. Time is driven entirely by sample timestamps, so replaying a
recorded stream reproduces the event log exactly. Elapsed time between two
samples is credited to the condition that held at the previous sample
(zero-order hold), which makes dwell accumulation independent of where the
25 Hz grid happens to fall.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .core import (GazeSample, Page, Region, ScreenGeometry, classify_sample,
                   cm_to_px, last_line_screen_y)
from .stream import FixationWindow, StreamConfig, StreamOrderError, detect_fixations


class Technique(enum.Enum):
    EYESWIPE = "eyeswipe"
    HITBOX = "hitbox"
    MOVING_BAR = "moving_bar"
    AUTO_SCROLL = "auto_scroll"


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True, slots=True)
class TechniqueConfig:
    """Every tunable threshold of the four techniques.

    The dwell and pursuit durations are reader-settable within their valid
    ranges; the rest are fixed interaction constants.
    """

    eyeswipe_prime_line_px: float = 690.0
    eyeswipe_prime_ms: float = 500.0
    eyeswipe_deprime_ms: float = 300.0
    eyeswipe_prime_timeout_ms: float = 3000.0
    hitbox_dwell_ms: float = 1000.0          # user-set, valid 500..2000
    hitbox_min_fixation_ms: float = 300.0    # fixed: shorter dwells are noise
    bar_activation_ms: float = 300.0
    bar_travel_cm: float = 2.7
    bar_duration_ms: float = 1000.0          # user-set, valid 500..1700
    bar_grace_ms: float = 100.0              # allows two dropped frames at 25 Hz
    bar_tolerance_px: float = 80.0
    auto_min_page_ms: float = 5000.0
    auto_sample_windows: tuple[tuple[float, float], ...] = ((0.0, 3000.0),
                                                            (8000.0, 3000.0))

    def replace_fields(self, **overrides) -> "TechniqueConfig":
        return replace(self, **overrides)


def validate_config(cfg: TechniqueConfig) -> list[str]:
    """Check every range invariant; returns all violations at once (empty
    list means the config is acceptable)."""
    problems: list[str] = []
    if not 500.0 <= cfg.hitbox_dwell_ms <= 2000.0:
        problems.append(
            f"hitbox_dwell_ms = {cfg.hitbox_dwell_ms:g} outside 500-2000")
    if not 500.0 <= cfg.bar_duration_ms <= 1700.0:
        problems.append(
            f"bar_duration_ms = {cfg.bar_duration_ms:g} outside 500-1700")
    if cfg.hitbox_dwell_ms <= cfg.hitbox_min_fixation_ms:
        problems.append("hitbox_dwell_ms must exceed hitbox_min_fixation_ms")
    for name in ("eyeswipe_prime_ms", "eyeswipe_deprime_ms",
                 "eyeswipe_prime_timeout_ms", "hitbox_min_fixation_ms",
                 "bar_activation_ms", "bar_duration_ms", "bar_grace_ms",
                 "auto_min_page_ms"):
        if getattr(cfg, name) <= 0:
            problems.append(f"{name} must be positive")
    if cfg.bar_travel_cm <= 0:
        problems.append("bar_travel_cm must be positive")
    if cfg.bar_tolerance_px <= 0:
        problems.append("bar_tolerance_px must be positive")
    if not cfg.auto_sample_windows:
        problems.append("auto_sample_windows must not be empty")
    for off, length in cfg.auto_sample_windows:
        if off < 0 or length <= 0:
            problems.append(f"bad sample window ({off:g}, {length:g})")
    return problems


def require_valid(cfg: TechniqueConfig) -> TechniqueConfig:
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


# --- detector events -------------------------------------------------------

@dataclass(frozen=True, slots=True)
class StateChange:
    from_state: str
    to_state: str


@dataclass(frozen=True, slots=True)
class Progress:
    fraction: float


@dataclass(frozen=True, slots=True)
class Trigger:
    pass


@dataclass(frozen=True, slots=True)
class Abort:
    reason: str


@dataclass(frozen=True, slots=True)
class Scheduled:
    eta_ms: float


Payload = StateChange | Progress | Trigger | Abort | Scheduled


@dataclass(frozen=True, slots=True)
class DetectorEvent:
    t_ms: float
    technique: Technique
    payload: Payload


class EyeSwipeState(enum.Enum):
    READING = "reading"
    PRIMING = "priming"
    PRIMED = "primed"
    TRIGGERED = "triggered"


class _Detector:
    """Shared timestamp bookkeeping for the sample-driven detectors."""

    technique: Technique

    def __init__(self) -> None:
        self._last_t: float | None = None

    def _advance(self, t_ms: float) -> float:
        if self._last_t is None:
            self._last_t = t_ms
            return 0.0
        if t_ms <= self._last_t:
            raise StreamOrderError(
                f"non-monotone timestamps: {self._last_t} then {t_ms}")
        dt = t_ms - self._last_t
        self._last_t = t_ms
        return dt

    def _ev(self, t_ms: float, payload: Payload) -> DetectorEvent:
        return DetectorEvent(t_ms=t_ms, technique=self.technique,
                             payload=payload)


class EyeSwipeDetector(_Detector):
    """Gaze-gesture scrolling: dwell low, then sweep to the top.

    Reading -> Priming while the gaze sits below the prime line; Primed once
    that has held for the prime duration; a move into the top bar then
    triggers the page turn. Returning to the text for the de-prime duration,
    or overstaying the prime timeout, aborts the attempt.
    """

    technique = Technique.EYESWIPE

    def __init__(self, cfg: TechniqueConfig = TechniqueConfig(),
                 geometry: ScreenGeometry = ScreenGeometry()) -> None:
        super().__init__()
        self._cfg = require_valid(cfg)
        self._geom = geometry
        self.state = EyeSwipeState.READING
        self._prime_accum = 0.0
        self._primed_at = 0.0
        self._reading_accum = 0.0
        self._prev_low = False   # previous sample below the prime line
        self._prev_text = False  # previous sample on the text above the line

    def reset(self) -> None:
        self.state = EyeSwipeState.READING
        self._prime_accum = 0.0
        self._reading_accum = 0.0
        self._prev_low = False
        self._prev_text = False

    def _goto(self, to: EyeSwipeState, t_ms: float,
              events: list[DetectorEvent]) -> None:
        events.append(self._ev(t_ms, StateChange(self.state.value, to.value)))
        self.state = to

    def step(self, s: GazeSample) -> list[DetectorEvent]:
        events: list[DetectorEvent] = []
        dt = self._advance(s.t_ms)
        region = classify_sample(self._geom, s)
        low = s.on_screen and s.y_px > self._cfg.eyeswipe_prime_line_px
        # "back on the text" means the reading area above the prime line;
        # dwelling on the last lines (below the line but still inside the
        # reading region) keeps the prime alive
        on_text = region is Region.READING and not low

        # credit the elapsed interval to whatever held at the last sample
        if self.state is EyeSwipeState.PRIMING and self._prev_low:
            self._prime_accum += dt
            if self._prime_accum >= self._cfg.eyeswipe_prime_ms:
                self._goto(EyeSwipeState.PRIMED, s.t_ms, events)
                self._primed_at = s.t_ms
                self._reading_accum = 0.0
        elif self.state is EyeSwipeState.PRIMED and self._prev_text:
            self._reading_accum += dt

        if self.state is EyeSwipeState.PRIMED:
            if low:
                # still engaged below the line: the prime is not stale
                self._primed_at = s.t_ms
            if s.t_ms - self._primed_at > self._cfg.eyeswipe_prime_timeout_ms:
                events.append(self._ev(s.t_ms, Abort("prime_timeout")))
                self._goto(EyeSwipeState.READING, s.t_ms, events)
            elif region is Region.TOP:
                self._goto(EyeSwipeState.TRIGGERED, s.t_ms, events)
                events.append(self._ev(s.t_ms, Trigger()))
                self._goto(EyeSwipeState.READING, s.t_ms, events)
            elif self._reading_accum >= self._cfg.eyeswipe_deprime_ms:
                events.append(self._ev(s.t_ms, Abort("returned_to_reading")))
                self._goto(EyeSwipeState.READING, s.t_ms, events)
            elif not on_text:
                self._reading_accum = 0.0
        elif self.state is EyeSwipeState.PRIMING and not low:
            self._goto(EyeSwipeState.READING, s.t_ms, events)

        if self.state is EyeSwipeState.READING and low:
            self._prime_accum = 0.0
            self._goto(EyeSwipeState.PRIMING, s.t_ms, events)

        self._prev_low = low
        self._prev_text = on_text
        return events


class HitboxDetector(_Detector):
    """Dwell scrolling on the bottom box.

    An incremental dispersion window tracks the current fixation inside the
    bottom area. The first 300 ms of any fixation are excluded as accidental;
    past that, progress ramps linearly and the page triggers at the
    configured dwell. Losing the fixation after progress began aborts the
    attempt with nothing carried over.
    """

    technique = Technique.HITBOX

    def __init__(self, cfg: TechniqueConfig = TechniqueConfig(),
                 geometry: ScreenGeometry = ScreenGeometry(),
                 stream_cfg: StreamConfig = StreamConfig()) -> None:
        super().__init__()
        self._cfg = require_valid(cfg)
        self._geom = geometry
        self._window = FixationWindow(
            stream_cfg,
            accept=lambda s: classify_sample(geometry, s) is Region.BOTTOM)
        self._progressing = False
        self._last_progress = 0.0

    def reset(self) -> None:
        self._window.reset()
        self._progressing = False
        self._last_progress = 0.0

    @property
    def progress(self) -> float:
        return self._last_progress if self._progressing else 0.0

    def step(self, s: GazeSample) -> list[DetectorEvent]:
        events: list[DetectorEvent] = []
        self._advance(s.t_ms)
        was_progressing = self._progressing
        open_fix = self._window.feed(s)
        if open_fix is None or open_fix.age_ms == 0.0:
            # window closed or restarted at this sample
            if was_progressing:
                events.append(self._ev(s.t_ms, Abort("fixation_lost")))
            self._progressing = False
            self._last_progress = 0.0
        if open_fix is None:
            return events

        age = open_fix.age_ms
        min_fix = self._cfg.hitbox_min_fixation_ms
        if age < min_fix:
            return events
        fraction = min(1.0, (age - min_fix)
                       / (self._cfg.hitbox_dwell_ms - min_fix))
        self._progressing = True
        self._last_progress = fraction
        events.append(self._ev(s.t_ms, Progress(fraction)))
        if age >= self._cfg.hitbox_dwell_ms:
            events.append(self._ev(s.t_ms, Trigger()))
            self.reset()
        return events


class BarState(enum.Enum):
    IDLE = "idle"
    ACTIVE = "active"


def bar_start_x(geometry: ScreenGeometry,
                cfg: TechniqueConfig = TechniqueConfig()) -> float:
    """Left end of the bar's travel strip, centered in the bottom area so the
    tolerance box stays on screen at both ends."""
    return (geometry.width_px - cm_to_px(geometry, cfg.bar_travel_cm)) / 2.0


class MovingBarDetector(_Detector):
    """Pursuit scrolling: dwell on the bar, then follow it to the right end.

    The bar rests at the left end of the bottom operation area. A 300 ms
    dwell on it starts the travel; the bar then moves right at constant
    speed over the configured distance and duration. Gaze excursions beyond
    the tolerance box are forgiven up to the grace period; anything longer
    aborts and sends the bar back to the start. Reaching the end with the
    gaze on the bar turns the page.
    """

    technique = Technique.MOVING_BAR

    def __init__(self, cfg: TechniqueConfig = TechniqueConfig(),
                 geometry: ScreenGeometry = ScreenGeometry()) -> None:
        super().__init__()
        self._cfg = require_valid(cfg)
        self._geom = geometry
        self._travel_px = cm_to_px(geometry, cfg.bar_travel_cm)
        self._start_x = bar_start_x(geometry, cfg)
        self.state = BarState.IDLE
        self._dwell_accum = 0.0
        self._active_since = 0.0
        self._excursion_since: float | None = None
        self._prev_on_bar = False
        self.bar_x_px = self._start_x

    def reset(self) -> None:
        self.state = BarState.IDLE
        self._dwell_accum = 0.0
        self._excursion_since = None
        self._prev_on_bar = False
        self.bar_x_px = self._start_x

    def _on_bar(self, s: GazeSample) -> bool:
        return (s.on_screen
                and classify_sample(self._geom, s) is Region.BOTTOM
                and abs(s.x_px - self.bar_x_px) <= self._cfg.bar_tolerance_px)

    def step(self, s: GazeSample) -> list[DetectorEvent]:
        events: list[DetectorEvent] = []
        dt = self._advance(s.t_ms)

        if self.state is BarState.IDLE:
            self.bar_x_px = self._start_x
            if self._prev_on_bar:
                self._dwell_accum += dt
            on_bar = self._on_bar(s)
            if not on_bar:
                self._dwell_accum = 0.0
            elif self._dwell_accum >= self._cfg.bar_activation_ms:
                events.append(self._ev(s.t_ms, StateChange(
                    BarState.IDLE.value, BarState.ACTIVE.value)))
                self.state = BarState.ACTIVE
                self._active_since = s.t_ms
                self._excursion_since = None
            self._prev_on_bar = on_bar
            return events

        fraction = min(1.0, (s.t_ms - self._active_since)
                       / self._cfg.bar_duration_ms)
        self.bar_x_px = self._start_x + self._travel_px * fraction
        on_bar = self._on_bar(s)
        if on_bar:
            self._excursion_since = None
        else:
            if self._excursion_since is None:
                self._excursion_since = s.t_ms
            if s.t_ms - self._excursion_since > self._cfg.bar_grace_ms:
                events.append(self._ev(s.t_ms, Abort("left_bar")))
                events.append(self._ev(s.t_ms, StateChange(
                    BarState.ACTIVE.value, BarState.IDLE.value)))
                self.reset()
                return events
        events.append(self._ev(s.t_ms, Progress(fraction)))
        if fraction >= 1.0 and on_bar:
            events.append(self._ev(s.t_ms, Trigger()))
            events.append(self._ev(s.t_ms, StateChange(
                BarState.ACTIVE.value, BarState.IDLE.value)))
            self.reset()
            return events
        self._prev_on_bar = on_bar
        return events


# --- implicit technique: reading-speed auto scroll -------------------------

@dataclass(frozen=True, slots=True)
class ReadingSpeedEstimate:
    v_px_per_s: float
    intercept_y_px: float
    r2: float
    n_fixations: int
    valid: bool

    @classmethod
    def invalid(cls, n_fixations: int = 0) -> "ReadingSpeedEstimate":
        return cls(0.0, 0.0, 0.0, n_fixations, False)


MIN_FIT_FIXATIONS = 4
MIN_FIT_R2 = 0.3


def fit_reading_speed(fixations, page_start_ms: float) -> ReadingSpeedEstimate:
    """Least-squares line through (time, fixation centroid y).

    Times are seconds since page start, so the slope is the vertical reading
    progression in px/s. The estimate is only valid with at least four
    fixations, a positive slope and a minimally coherent fit.
    """
    n = len(fixations)
    if n < MIN_FIT_FIXATIONS:
        return ReadingSpeedEstimate.invalid(n)
    ts = np.array([(f.mid_ms - page_start_ms) / 1000.0 for f in fixations])
    ys = np.array([f.centroid_y_px for f in fixations])
    if np.ptp(ts) == 0.0:
        return ReadingSpeedEstimate.invalid(n)
    slope, intercept = np.polyfit(ts, ys, 1)
    if abs(slope) < 1e-9:  # flat trace: no vertical progression
        slope = 0.0
    pred = slope * ts + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    valid = slope > 0.0 and r2 >= MIN_FIT_R2
    return ReadingSpeedEstimate(float(slope), float(intercept), r2, n, valid)


def autoscroll_update(window_samples,
                      geometry: ScreenGeometry = ScreenGeometry(),
                      stream_cfg: StreamConfig = StreamConfig(),
                      page_start_ms: float = 0.0) -> ReadingSpeedEstimate:
    """Estimate reading speed from the sampled windows of a page.

    ``window_samples`` is a sequence of sample sequences, one per sampling
    window; fixations are detected per window so the gap between windows
    cannot fabricate a fixation. Samples outside the top/reading regions are
    ignored.
    """
    fixations = []
    for window in window_samples:
        kept = [s for s in window
                if classify_sample(geometry, s) in (Region.TOP, Region.READING)]
        fixations.extend(detect_fixations(kept, stream_cfg))
    return fit_reading_speed(fixations, page_start_ms)


def autoscroll_eta_ms(estimate: ReadingSpeedEstimate, target_y_px: float,
                      now_ms: float, page_start_ms: float,
                      cfg: TechniqueConfig = TechniqueConfig()) -> float:
    """Predicted time the reader finishes the page, clamped so the page is
    displayed for at least ``auto_min_page_ms``."""
    if not estimate.valid:
        raise ValueError("cannot schedule from an invalid estimate")
    predicted_y = (estimate.intercept_y_px
                   + estimate.v_px_per_s * (now_ms - page_start_ms) / 1000.0)
    remaining_ms = max(0.0, (target_y_px - predicted_y)
                       / estimate.v_px_per_s * 1000.0)
    return max(now_ms + remaining_ms, page_start_ms + cfg.auto_min_page_ms)


class AutoScrollDetector(_Detector):
    """Implicit scrolling from predicted reading speed.

    Gaze is sampled in configured windows after each page turn; a linear fit
    over the fixation centroids predicts when the reader will reach the last
    line, and the page turn is scheduled for that instant. An invalid fit
    never turns the page: a premature turn costs more than a missed one.
    """

    technique = Technique.AUTO_SCROLL

    def __init__(self, cfg: TechniqueConfig = TechniqueConfig(),
                 geometry: ScreenGeometry = ScreenGeometry(),
                 stream_cfg: StreamConfig = StreamConfig()) -> None:
        super().__init__()
        self._cfg = require_valid(cfg)
        self._geom = geometry
        self._stream_cfg = stream_cfg
        self._page: Page | None = None
        self._page_start = 0.0
        self._windows: list[tuple[float, float]] = []
        self._collected: list[list[GazeSample]] = []
        self._next_window = 0
        self._eta: float | None = None
        self._triggered = False
        self.estimate = ReadingSpeedEstimate.invalid()

    def reset(self) -> None:
        self._page = None
        self._windows = []
        self._collected = []
        self._next_window = 0
        self._eta = None
        self._triggered = False
        self.estimate = ReadingSpeedEstimate.invalid()

    def page_started(self, page: Page, t_ms: float) -> None:
        self.reset()
        self._page = page
        self._page_start = t_ms
        self._windows = [(t_ms + off, t_ms + off + length)
                         for off, length in self._cfg.auto_sample_windows]
        self._collected = [[] for _ in self._windows]

    @property
    def scheduled_eta_ms(self) -> float | None:
        return self._eta

    def _refit(self, t_ms: float, events: list[DetectorEvent]) -> None:
        self.estimate = autoscroll_update(
            self._collected[:self._next_window], self._geom,
            self._stream_cfg, self._page_start)
        if self.estimate.valid:
            self._eta = autoscroll_eta_ms(
                self.estimate, last_line_screen_y(self._geom, self._page),
                t_ms, self._page_start, self._cfg)
            events.append(self._ev(t_ms, Scheduled(self._eta)))

    def step(self, s: GazeSample) -> list[DetectorEvent]:
        events: list[DetectorEvent] = []
        self._advance(s.t_ms)
        if self._page is None or self._triggered:
            return events
        while (self._next_window < len(self._windows)
               and s.t_ms >= self._windows[self._next_window][1]):
            self._next_window += 1
            self._refit(s.t_ms, events)
        if self._next_window < len(self._windows):
            start, end = self._windows[self._next_window]
            if start <= s.t_ms < end:
                self._collected[self._next_window].append(s)
        if self._eta is not None and s.t_ms >= self._eta:
            events.append(self._ev(s.t_ms, Trigger()))
            self._triggered = True
        return events


def make_detector(technique: Technique,
                  cfg: TechniqueConfig = TechniqueConfig(),
                  geometry: ScreenGeometry = ScreenGeometry(),
                  stream_cfg: StreamConfig = StreamConfig()):
    if technique is Technique.EYESWIPE:
        return EyeSwipeDetector(cfg, geometry)
    if technique is Technique.HITBOX:
        return HitboxDetector(cfg, geometry, stream_cfg)
    if technique is Technique.MOVING_BAR:
        return MovingBarDetector(cfg, geometry)
    if technique is Technique.AUTO_SCROLL:
        return AutoScrollDetector(cfg, geometry, stream_cfg)
    raise ValueError(f"unknown technique: {technique}")
