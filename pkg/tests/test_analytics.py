from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gazescroll.analytics import (ActivationMetrics, format_metrics_table,
                                  heatmap, heatmap_to_grid_text,
                                  heatmap_to_pgm, merge_metrics, ramp_color,
                                  robustness_table, rtpp, scanpath,
                                  scanpath_to_svg, score_attempts)
from gazescroll.core import GazeSample, ScreenGeometry, ScrollCause, ScrollEvent
from gazescroll.simulate import GestureAnnotation
from gazescroll.stream import Fixation
from gazescroll.techniques import Technique

G = ScreenGeometry()


def sample_at(x, y, i=0, on=True):
    return GazeSample(i * 40.0, float(x), float(y), on)


# --- heatmap ----------------------------------------------------------------

def test_heatmap_single_cell():
    h = heatmap([sample_at(5, 5, i) for i in range(10)], G, 10.0)
    assert h.cells[0, 0] == 1.0
    assert h.cells.sum() == pytest.approx(1.0)
    assert h.on_screen_count == 10 and h.off_screen_count == 0


def test_heatmap_two_equal_cells():
    samples = [sample_at(5, 5, 0), sample_at(55, 5, 1)]
    h = heatmap(samples, G, 10.0)
    assert h.cells[0, 0] == 0.5 and h.cells[0, 5] == 0.5


def test_heatmap_default_grid_shape():
    h = heatmap([], G, 10.0)
    assert (h.cols, h.rows) == (43, 93)
    assert h.cells.sum() == 0.0


def test_heatmap_offscreen_counted_separately():
    samples = [sample_at(5, 5, 0), sample_at(5, 5, 1, on=False),
               sample_at(-3, 5, 2)]
    h = heatmap(samples, G, 10.0)
    assert h.on_screen_count == 1 and h.off_screen_count == 2
    assert h.cells.sum() == pytest.approx(1.0)


def test_heatmap_matches_brute_force_binning():
    rng = np.random.default_rng(13)
    samples = [GazeSample(i * 40.0, float(rng.uniform(0, 428)),
                          float(rng.uniform(0, 926)),
                          bool(rng.random() > 0.05)) for i in range(2000)]
    h = heatmap(samples, G, 10.0)
    counts: dict[tuple[int, int], int] = {}
    on = 0
    for s in samples:
        if s.on_screen:
            on += 1
            key = (int(s.y_px // 10), int(s.x_px // 10))
            counts[key] = counts.get(key, 0) + 1
    for (r, c), n in counts.items():
        assert h.cells[r, c] == pytest.approx(n / on)
    assert h.cells.sum() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 427.99), st.floats(0, 925.99)),
                min_size=1, max_size=80))
def test_heatmap_normalization_property(points):
    samples = [GazeSample(i * 40.0, x, y) for i, (x, y) in enumerate(points)]
    h = heatmap(samples, G, 10.0)
    assert abs(h.cells.sum() - 1.0) <= 1e-9
    assert (h.cells >= 0).all()


def test_heatmap_rejects_bad_cell():
    with pytest.raises(ValueError):
        heatmap([], G, 0.0)


def test_heatmap_exports():
    h = heatmap([sample_at(5, 5, i) for i in range(4)], G, 10.0)
    pgm = heatmap_to_pgm(h)
    lines = pgm.splitlines()
    assert lines[0] == "P2" and lines[1] == "43 93" and lines[2] == "255"
    assert lines[3].split()[0] == "255"
    grid = heatmap_to_grid_text(h)
    assert grid.startswith("# heatmap cell_px=10")


# --- scan-path --------------------------------------------------------------

def fx(start, x, y, dur=200.0):
    return Fixation(start, start + dur, float(x), float(y), 5)


def test_scanpath_fractions_even():
    path = scanpath([fx(0, 10, 10), fx(500, 20, 20), fx(1000, 30, 30)])
    assert [v[0] for v in path.vertices] == [0.0, 0.5, 1.0]


def test_scanpath_single_fixation():
    path = scanpath([fx(100, 10, 10)])
    assert path.vertices == ((0.0, 10.0, 10.0),)


def test_scanpath_empty():
    assert scanpath([]).vertices == ()


def test_ramp_color_endpoints_and_midpoint():
    assert ramp_color(0.0) == (255, 0, 0)
    assert ramp_color(1.0) == (0, 255, 0)
    assert ramp_color(0.5) == (128, 128, 0)  # midpoint of the ramp


def test_scanpath_svg_contains_colored_segments():
    path = scanpath([fx(0, 10, 10), fx(500, 20, 20), fx(1000, 30, 30)])
    svg = scanpath_to_svg(path, G)
    assert svg.startswith("<svg")
    assert svg.count("<line") == 2
    assert 'stroke="rgb(' in svg


# --- reading time per page --------------------------------------------------

def test_rtpp_arithmetic():
    result = rtpp([30000.0, 65000.0], session_start_ms=0.0)
    assert result.per_page_s == (30.0, 35.0)
    assert result.mean_s == pytest.approx(32.5)
    assert result.sd_s == pytest.approx(2.5)


def test_rtpp_single_page_runs_to_session_end():
    result = rtpp([], session_start_ms=0.0, session_end_ms=42000.0)
    assert result.per_page_s == (42.0,)


def test_rtpp_with_scroll_events():
    scrolls = [ScrollEvent(20000.0, 0, 1, ScrollCause.HITBOX),
               ScrollEvent(50000.0, 1, 2, ScrollCause.HITBOX)]
    result = rtpp(scrolls, 0.0, 60000.0)
    assert result.per_page_s == (20.0, 30.0, 10.0)


def test_rtpp_durations_sum_to_session_length():
    scrolls = [12000.0, 30000.0, 47000.0]
    result = rtpp(scrolls, 0.0, 55000.0)
    assert sum(result.per_page_s) == pytest.approx(55.0)


def test_rtpp_empty():
    assert rtpp([], 0.0).per_page_s == ()


def test_rtpp_rejects_unordered():
    with pytest.raises(ValueError):
        rtpp([3000.0, 2000.0], 0.0)


# --- activation metrics -----------------------------------------------------

def ann(technique, complete, window=1000.0):
    return GestureAnnotation(technique, complete - 500.0, complete, window)


def test_score_attempts_all_matched():
    m = score_attempts([1000.0, 5000.0],
                       [ann(Technique.HITBOX, 900.0),
                        ann(Technique.HITBOX, 5100.0)],
                       Technique.HITBOX, "sitting")
    assert m.attempts == 2 and m.true_triggers == 2
    assert m.false_triggers == 0 and m.aborts == 0
    assert m.mean_detection_latency_ms == pytest.approx(50.0)
    assert m.failure_rate == 0.0


def test_score_attempts_false_trigger():
    m = score_attempts([9000.0], [ann(Technique.HITBOX, 1000.0)],
                       Technique.HITBOX, "sitting")
    assert m.false_triggers == 1 and m.true_triggers == 0
    assert m.aborts == 1  # the injected attempt never matched
    assert m.failure_rate == 2.0


def test_score_attempts_detector_disabled():
    m = score_attempts([], [ann(Technique.HITBOX, 1000.0)],
                       Technique.HITBOX, "sitting")
    assert m.attempts == 1 and m.triggers == 0 and m.aborts == 1


def test_false_triggers_never_exceed_triggers():
    m = score_attempts([500.0, 700.0, 9000.0],
                       [ann(Technique.HITBOX, 600.0)],
                       Technique.HITBOX, "sitting")
    assert m.false_triggers <= m.triggers
    assert m.true_triggers == 1


def test_merge_metrics_weighted_latency():
    a = ActivationMetrics(Technique.HITBOX, "sitting", 2, 2, 2, 0, 0, 100.0)
    b = ActivationMetrics(Technique.HITBOX, "sitting", 2, 1, 1, 0, 1, 40.0)
    merged = merge_metrics([a, b])
    assert merged.attempts == 4 and merged.true_triggers == 3
    assert merged.mean_detection_latency_ms == pytest.approx((200 + 40) / 3)
    with pytest.raises(ValueError):
        merge_metrics([a, ActivationMetrics(Technique.EYESWIPE, "sitting",
                                            1, 1, 1, 0, 0, 0.0)])


def test_robustness_table_orders_by_failure_rate_and_keeps_empty_groups():
    good = ActivationMetrics(Technique.EYESWIPE, "walking", 10, 9, 9, 0, 1, 5.0)
    bad = ActivationMetrics(Technique.MOVING_BAR, "walking", 10, 1, 1, 0, 9, 5.0)
    rows = robustness_table({
        (Technique.EYESWIPE, "walking"): [good],
        (Technique.MOVING_BAR, "walking"): [bad],
        (Technique.HITBOX, "walking"): [],
    })
    assert rows[0].technique is Technique.MOVING_BAR
    empty = [r for r in rows if r.technique is Technique.HITBOX][0]
    assert empty.attempts == 0 and empty.failure_rate == 0.0


def test_metrics_table_renders():
    rows = [ActivationMetrics(Technique.HITBOX, "sitting", 5, 5, 5, 0, 0, 8.0)]
    text = format_metrics_table(rows)
    assert "hitbox" in text and "sitting" in text
