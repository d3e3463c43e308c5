"""Scan-path and heatmap computation, reading time per page, and
activation/robustness metrics across recorded sessions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import GazeSample, ScreenGeometry, ScrollEvent
from .stream import Fixation
from .techniques import Technique


@dataclass(frozen=True)
class Heatmap:
    """Normalized gaze density over a fixed cell grid. Off-screen samples are
    tallied separately and never enter the grid."""

    cells: np.ndarray          # shape (rows, cols), row = y band
    cell_px: float
    on_screen_count: int
    off_screen_count: int

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    @property
    def rows(self) -> int:
        return self.cells.shape[0]


def heatmap(samples: Sequence[GazeSample], g: ScreenGeometry = ScreenGeometry(),
            cell_px: float = 10.0) -> Heatmap:
    if cell_px <= 0:
        raise ValueError("cell_px must be positive")
    cols = math.ceil(g.width_px / cell_px)
    rows = math.ceil(g.height_px / cell_px)
    grid = np.zeros((rows, cols))
    on = off = 0
    for s in samples:
        if not s.on_screen or not g.contains(s.x_px, s.y_px):
            off += 1
            continue
        on += 1
        grid[int(s.y_px // cell_px), int(s.x_px // cell_px)] += 1.0
    if on:
        grid /= grid.sum()
    return Heatmap(cells=grid, cell_px=cell_px,
                   on_screen_count=on, off_screen_count=off)


def heatmap_to_pgm(h: Heatmap) -> str:
    """ASCII portable graymap, brightest cell = 255."""
    peak = float(h.cells.max())
    scaled = (h.cells / peak * 255.0).astype(int) if peak > 0 else \
        np.zeros_like(h.cells, dtype=int)
    lines = [f"P2", f"{h.cols} {h.rows}", "255"]
    lines += [" ".join(str(v) for v in row) for row in scaled]
    return "\n".join(lines) + "\n"


def heatmap_to_grid_text(h: Heatmap) -> str:
    lines = [f"# heatmap cell_px={h.cell_px:g} cols={h.cols} rows={h.rows} "
             f"on={h.on_screen_count} off={h.off_screen_count}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in h.cells]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, slots=True)
class ScanPath:
    """Time-ordered fixation polyline; each vertex carries its fraction of
    the path's time span (0 at the first fixation, 1 at the last)."""

    vertices: tuple[tuple[float, float, float], ...]  # (fraction, x, y)


def scanpath(fixations: Sequence[Fixation]) -> ScanPath:
    if not fixations:
        return ScanPath(vertices=())
    first = fixations[0].start_ms
    last = fixations[-1].start_ms
    span = last - first
    verts = []
    for f in fixations:
        frac = 0.0 if span == 0.0 else (f.start_ms - first) / span
        verts.append((frac, f.centroid_x_px, f.centroid_y_px))
    return ScanPath(vertices=tuple(verts))


def ramp_color(fraction: float) -> tuple[int, int, int]:
    """Red at the start of the path, green at the end."""
    f = min(1.0, max(0.0, fraction))
    return (round(255 * (1.0 - f)), round(255 * f), 0)


def scanpath_to_svg(path: ScanPath, g: ScreenGeometry = ScreenGeometry()) -> str:
    """SVG rendering: one line per segment, stroke colored by the segment's
    midpoint time fraction, plus vertex dots."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{g.width_px}" height="{g.height_px}" '
        f'viewBox="0 0 {g.width_px} {g.height_px}">',
        f'<rect width="{g.width_px}" height="{g.height_px}" fill="white"/>',
    ]
    v = path.vertices
    for (f0, x0, y0), (f1, x1, y1) in zip(v, v[1:]):
        r, gr, b = ramp_color((f0 + f1) / 2.0)
        parts.append(
            f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x1:.1f}" y2="{y1:.1f}" '
            f'stroke="rgb({r},{gr},{b})" stroke-width="2"/>')
    for f, x, y in v:
        r, gr, b = ramp_color(f)
        parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" '
                     f'fill="rgb({r},{gr},{b})"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass(frozen=True, slots=True)
class RtppResult:
    per_page_s: tuple[float, ...]
    mean_s: float
    sd_s: float


def rtpp(scroll_events: Sequence[ScrollEvent] | Sequence[float],
         session_start_ms: float,
         session_end_ms: float | None = None) -> RtppResult:
    """Reading time per page: intervals between consecutive page boundaries.

    Boundaries are the session start plus each scroll; the trailing partial
    page counts when the session runs past the last scroll. Standard
    deviation is the population one.
    """
    times = [e.t_ms if isinstance(e, ScrollEvent) else float(e)
             for e in scroll_events]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("scroll events must be time-ordered")
    bounds = [session_start_ms] + times
    if session_end_ms is not None and (not times or session_end_ms > times[-1]):
        bounds.append(session_end_ms)
    durations = tuple((b - a) / 1000.0 for a, b in zip(bounds, bounds[1:]))
    if not durations:
        return RtppResult((), 0.0, 0.0)
    mean = sum(durations) / len(durations)
    sd = math.sqrt(sum((d - mean) ** 2 for d in durations) / len(durations))
    return RtppResult(durations, mean, sd)


@dataclass(frozen=True, slots=True)
class ActivationMetrics:
    """Per technique-and-mobility attempt accounting.

    ``aborts`` counts aborted attempts: injected activations that never
    produced a matching trigger. A trigger matches an attempt when it lands
    within the attempt's matching window of the gesture completion.
    """

    technique: Technique
    mobility: str
    attempts: int
    triggers: int
    true_triggers: int
    false_triggers: int
    aborts: int
    mean_detection_latency_ms: float

    @property
    def failure_rate(self) -> float:
        if self.attempts == 0:
            return 0.0
        return (self.false_triggers + self.aborts) / self.attempts

    @property
    def success_rate(self) -> float:
        return 0.0 if self.attempts == 0 else self.true_triggers / self.attempts


def score_attempts(trigger_times: Sequence[float], annotations,
                   technique: Technique, mobility: str) -> ActivationMetrics:
    """Match a session's triggers against its injected-gesture annotations."""
    anns = [a for a in annotations if a.technique is technique]
    matched: set[int] = set()
    latencies: list[float] = []
    false_triggers = 0
    for t in trigger_times:
        best = None
        for i, a in enumerate(anns):
            if i in matched:
                continue
            off = t - a.complete_ms
            if abs(off) <= a.match_window_ms:
                if best is None or abs(off) < abs(t - anns[best].complete_ms):
                    best = i
        if best is None:
            false_triggers += 1
        else:
            matched.add(best)
            latencies.append(max(0.0, t - anns[best].complete_ms))
    true_triggers = len(matched)
    return ActivationMetrics(
        technique=technique,
        mobility=mobility,
        attempts=len(anns),
        triggers=len(trigger_times),
        true_triggers=true_triggers,
        false_triggers=false_triggers,
        aborts=len(anns) - true_triggers,
        mean_detection_latency_ms=(sum(latencies) / len(latencies)
                                   if latencies else 0.0),
    )


def merge_metrics(parts: Sequence[ActivationMetrics]) -> ActivationMetrics:
    if not parts:
        raise ValueError("nothing to merge")
    tech = parts[0].technique
    mob = parts[0].mobility
    if any(p.technique is not tech or p.mobility != mob for p in parts):
        raise ValueError("can only merge metrics of one technique/mobility")
    lat_total = sum(p.mean_detection_latency_ms * p.true_triggers for p in parts)
    true_total = sum(p.true_triggers for p in parts)
    return ActivationMetrics(
        technique=tech, mobility=mob,
        attempts=sum(p.attempts for p in parts),
        triggers=sum(p.triggers for p in parts),
        true_triggers=true_total,
        false_triggers=sum(p.false_triggers for p in parts),
        aborts=sum(p.aborts for p in parts),
        mean_detection_latency_ms=lat_total / true_total if true_total else 0.0,
    )


def robustness_table(groups: dict[tuple[Technique, str],
                                  Sequence[ActivationMetrics]]
                     ) -> list[ActivationMetrics]:
    """Aggregate per (technique, mobility) group, worst failure rate first.
    Groups with no sessions appear with zero attempts."""
    rows = []
    for (tech, mob), parts in groups.items():
        if parts:
            rows.append(merge_metrics(list(parts)))
        else:
            rows.append(ActivationMetrics(tech, mob, 0, 0, 0, 0, 0, 0.0))
    rows.sort(key=lambda m: (-m.failure_rate, m.technique.value, m.mobility))
    return rows


def format_metrics_table(rows: Sequence[ActivationMetrics]) -> str:
    header = (f"{'technique':12s} {'mobility':8s} {'attempts':>8s} "
              f"{'true':>5s} {'false':>5s} {'aborts':>6s} "
              f"{'fail-rate':>9s} {'latency-ms':>10s}")
    out = [header, "-" * len(header)]
    for m in rows:
        out.append(
            f"{m.technique.value:12s} {m.mobility:8s} {m.attempts:8d} "
            f"{m.true_triggers:5d} {m.false_triggers:5d} {m.aborts:6d} "
            f"{m.failure_rate:9.3f} {m.mean_detection_latency_ms:10.1f}")
    return "\n".join(out)
