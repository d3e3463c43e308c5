"""End-to-end simulated sessions: generate a reading trace, inject the
activation gesture, degrade it with the mobility noise model, run the
detector and record everything. Used by the CLI and by the verification
suite; every session is a pure function of its seed."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .analytics import ActivationMetrics, merge_metrics, score_attempts
from .core import (DocumentModel, GazeSample, ScreenGeometry, ScrollCause,
                   ScrollEvent, build_document)
from .session_io import (PageBoundary, SessionHeader, SessionRecording,
                         record_time)
from .simulate import (FRAME_MS, NoiseModel, ReaderProfile,
                       activation_pattern_ms, apply_noise, gen_reading_trace,
                       inject_activation)
from .stream import StreamConfig, smooth
from .techniques import (AutoScrollDetector, Technique, TechniqueConfig,
                         Trigger, make_detector, require_valid)

_SCROLL_CAUSE = {
    Technique.EYESWIPE: ScrollCause.EYESWIPE,
    Technique.HITBOX: ScrollCause.HITBOX,
    Technique.MOVING_BAR: ScrollCause.MOVING_BAR,
    Technique.AUTO_SCROLL: ScrollCause.AUTO_SCROLL,
}

# finished readers hold their gaze on the last line while the (implicit)
# turn is pending
_AUTOSCROLL_HOLD_MS = 5000.0


@dataclass(frozen=True, slots=True)
class SessionSpec:
    technique: Technique
    mobility: str
    seed: int
    n_pages: int = 1
    config: TechniqueConfig = TechniqueConfig()
    geometry: ScreenGeometry = ScreenGeometry()
    stream: StreamConfig = StreamConfig()


def _hold_tail(trace: list[GazeSample], hold_ms: float) -> list[GazeSample]:
    last = trace[-1]
    frames = int(hold_ms // FRAME_MS)
    tail = [GazeSample(last.t_ms + (k + 1) * FRAME_MS, last.x_px, last.y_px)
            for k in range(frames)]
    return trace + tail


def _drive(detector, samples, stream_cfg: StreamConfig,
           boundaries: dict[float, int], doc: DocumentModel):
    """The one conditioning-and-detection pipeline: smooth the whole raw
    stream, announce page starts to the implicit detector, step every sample.
    Both live sessions and replays run through here, which is what makes
    replay determinism structural rather than accidental."""
    conditioned = smooth(samples, stream_cfg)
    implicit = isinstance(detector, AutoScrollDetector)
    for s in conditioned:
        if implicit and s.t_ms in boundaries:
            detector.page_started(doc.pages[boundaries[s.t_ms]], s.t_ms)
        yield s, detector.step(s)


def run_session(spec: SessionSpec,
                doc: DocumentModel | None = None) -> SessionRecording:
    """Simulate one session: per page, a paced reading trace with the
    activation gesture injected near the end (explicit techniques) or a
    trailing hold on the last line (auto-scroll)."""
    require_valid(spec.config)
    NoiseModel.for_label(spec.mobility)  # validate the label early
    doc = doc or build_document(spec.geometry)
    rng = np.random.default_rng(spec.seed)
    recording = SessionRecording(header=SessionHeader(
        geometry=spec.geometry, technique=spec.technique, config=spec.config,
        stream=spec.stream, noise_label=spec.mobility, seed=spec.seed))

    observed: list[GazeSample] = []
    boundaries: dict[float, int] = {}
    t0 = 0.0
    for page_idx in range(min(spec.n_pages, doc.page_count)):
        page = doc.pages[page_idx]
        duration = float(rng.uniform(18000.0, 26000.0))
        profile = ReaderProfile(seed=int(rng.integers(0, 2**31)))
        truth = gen_reading_trace(profile, page, spec.geometry, duration)
        if spec.technique is Technique.AUTO_SCROLL:
            truth = _hold_tail(truth, _AUTOSCROLL_HOLD_MS)
            truth, annotation = inject_activation(
                truth, spec.technique, spec.config, spec.geometry, 0.0)
        else:
            at = duration - activation_pattern_ms(
                spec.technique, spec.config) - 2 * FRAME_MS
            truth, annotation = inject_activation(
                truth, spec.technique, spec.config, spec.geometry, at)
        truth = [replace(s, t_ms=s.t_ms + t0) for s in truth]
        observed.extend(apply_noise(
            truth, NoiseModel.for_label(spec.mobility), spec.geometry,
            seed=int(rng.integers(0, 2**31))))
        boundaries[t0] = page_idx
        recording.append(PageBoundary(t_ms=t0, page_index=page_idx))
        recording.append(replace(annotation,
                                 start_ms=annotation.start_ms + t0,
                                 complete_ms=annotation.complete_ms + t0))
        t0 = truth[-1].t_ms + FRAME_MS

    detector = make_detector(spec.technique, spec.config, spec.geometry,
                             spec.stream)
    page_of = sorted(boundaries.items())
    turned_pages: set[int] = set()
    for raw, (s, events) in zip(observed, _drive(
            detector, observed, spec.stream, boundaries, doc)):
        recording.append(raw)
        current = max(idx for t, idx in page_of if t <= s.t_ms)
        for event in events:
            recording.append(event)
            if (isinstance(event.payload, Trigger)
                    and current not in turned_pages
                    and current + 1 < doc.page_count):
                turned_pages.add(current)
                recording.append(ScrollEvent(
                    t_ms=event.t_ms, from_page=current, to_page=current + 1,
                    cause=_SCROLL_CAUSE[spec.technique]))
    recording.records.sort(key=record_time)  # stable: ties keep causal order
    return recording


def replay_events(recording: SessionRecording):
    """Re-run the pipeline the recording's header describes over its raw
    samples; with matching configs this reproduces the recorded event log."""
    header = recording.header
    detector = make_detector(header.technique, header.config, header.geometry,
                             header.stream)
    boundaries = {b.t_ms: b.page_index for b in recording.page_boundaries()}
    doc = build_document(header.geometry)
    events = []
    for _, evs in _drive(detector, recording.samples(), header.stream,
                         boundaries, doc):
        events.extend(evs)
    return events


def session_metrics(recording: SessionRecording) -> ActivationMetrics:
    triggers = [e.t_ms for e in recording.events()
                if isinstance(e.payload, Trigger)]
    return score_attempts(triggers, recording.annotations(),
                          recording.header.technique,
                          recording.header.noise_label)


def run_campaign(techniques, mobilities, seeds,
                 config: TechniqueConfig = TechniqueConfig(),
                 geometry: ScreenGeometry = ScreenGeometry(),
                 n_pages: int = 1,
                 ) -> tuple[list[SessionRecording], list[ActivationMetrics]]:
    """Run the full grid and aggregate one metrics row per
    (technique, mobility), worst failure rate first."""
    recordings = []
    rows = []
    for tech in techniques:
        for mob in mobilities:
            per = []
            for seed in seeds:
                rec = run_session(SessionSpec(
                    technique=tech, mobility=mob, seed=seed, config=config,
                    geometry=geometry, n_pages=n_pages))
                recordings.append(rec)
                per.append(session_metrics(rec))
            rows.append(merge_metrics(per))
    rows.sort(key=lambda m: (-m.failure_rate, m.technique.value, m.mobility))
    return recordings, rows
