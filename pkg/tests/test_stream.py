from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from gazescroll.core import GazeSample
from gazescroll.stream import (FixationWindow, StreamConfig, StreamOrderError,
                               detect_fixations, smooth)

CFG = StreamConfig()


def stream(xs, ys=None, dt=40.0, on=None):
    ys = ys if ys is not None else [500.0] * len(xs)
    on = on if on is not None else [True] * len(xs)
    return [GazeSample(i * dt, float(x), float(y), o)
            for i, (x, y, o) in enumerate(zip(xs, ys, on))]


# --- smoothing --------------------------------------------------------------

def test_smooth_constant_stream_unchanged():
    s = stream([100] * 10)
    assert smooth(s, CFG) == s


def test_smooth_removes_single_spike():
    s = stream([100, 100, 400, 100, 100])
    out = smooth(s, CFG)
    assert [o.x_px for o in out] == [100, 100, 100, 100, 100]
    assert [o.t_ms for o in out] == [o.t_ms for o in s]


def test_smooth_empty_stream():
    assert smooth([], CFG) == []


def test_smooth_offscreen_passthrough():
    s = stream([100, 100, 999, 100, 100], on=[True, True, False, True, True])
    out = smooth(s, CFG)
    assert out[2] == s[2]                     # untouched
    assert [o.x_px for o in out] == [100, 100, 999, 100, 100]


def test_smooth_offscreen_excluded_from_neighbours():
    # the window around index 1 must not see the off-screen 999
    s = stream([100, 120, 999, 140, 160], on=[True, True, False, True, True])
    out = smooth(s, CFG)
    assert out[1].x_px == pytest.approx(110.0)  # median of [100, 120]
    assert out[3].x_px == pytest.approx(150.0)  # median of [140, 160]


def test_smooth_rejects_unordered():
    s = [GazeSample(40.0, 1, 1), GazeSample(0.0, 1, 1)]
    with pytest.raises(StreamOrderError):
        smooth(s, CFG)


def test_smoothing_window_must_be_odd():
    with pytest.raises(ValueError):
        StreamConfig(smoothing_window=4)


# --- fixation detection -----------------------------------------------------

def brute_force_fixations(samples, cfg):
    """Naive window scan: for every start, the largest on-screen window whose
    x and y spreads stay within the dispersion limit."""
    out = []
    i, n = 0, len(samples)
    while i < n:
        if not samples[i].on_screen:
            i += 1
            continue
        j = i
        while j + 1 < n and samples[j + 1].on_screen:
            window = samples[i:j + 2]
            xs = [s.x_px for s in window]
            ys = [s.y_px for s in window]
            if (max(xs) - min(xs) > cfg.dispersion_px
                    or max(ys) - min(ys) > cfg.dispersion_px):
                break
            j += 1
        if samples[j].t_ms - samples[i].t_ms >= cfg.min_fixation_ms:
            out.append((samples[i].t_ms, samples[j].t_ms, j - i + 1))
            i = j + 1
        else:
            i += 1
    return out


def test_constant_point_single_fixation():
    s = stream([200] * 13)  # 0..480 ms
    fixations = detect_fixations(s, CFG)
    assert len(fixations) == 1
    f = fixations[0]
    assert f.start_ms == 0.0 and f.end_ms == 480.0
    assert f.duration_ms == 480.0
    assert f.centroid_x_px == 200.0 and f.centroid_y_px == 500.0
    assert f.sample_count == 13


def test_alternating_far_points_no_fixation():
    s = stream([100, 300] * 10)
    assert detect_fixations(s, CFG) == []


def test_two_clusters_with_saccade_between():
    xs = [100] * 11 + [250] + [400] * 11  # two 400 ms clusters, 300 px apart
    fixations = detect_fixations(stream(xs), CFG)
    assert len(fixations) == 2
    assert fixations[0].centroid_x_px == pytest.approx(100)
    assert fixations[1].centroid_x_px == pytest.approx(400)
    expected = brute_force_fixations(stream(xs), CFG)
    got = [(f.start_ms, f.end_ms, f.sample_count) for f in fixations]
    assert got == expected


def test_empty_input():
    assert detect_fixations([], CFG) == []


def test_offscreen_terminates_fixation():
    on = [True] * 6 + [False] + [True] * 6
    fixations = detect_fixations(stream([100] * 13, on=on), CFG)
    assert len(fixations) == 2
    assert fixations[0].end_ms == 200.0
    assert fixations[1].start_ms == 280.0


coords = st.floats(0, 900)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coords, coords, st.booleans()), max_size=60))
def test_fixations_match_brute_force_and_are_maximal(points):
    samples = [GazeSample(i * 40.0, x, y, on)
               for i, (x, y, on) in enumerate(points)]
    fixations = detect_fixations(samples, CFG)
    expected = brute_force_fixations(samples, CFG)
    assert [(f.start_ms, f.end_ms, f.sample_count) for f in fixations] \
        == expected
    # non-overlap, ordering, duration floor
    for a, b in zip(fixations, fixations[1:]):
        assert a.end_ms < b.start_ms
    for f in fixations:
        assert f.duration_ms >= CFG.min_fixation_ms
    # determinism
    assert detect_fixations(samples, CFG) == fixations


def test_fixation_window_incremental_matches_ages():
    w = FixationWindow(CFG)
    s = stream([100] * 5)
    ages = [w.feed(x).age_ms for x in s]
    assert ages == [0.0, 40.0, 80.0, 120.0, 160.0]


def test_fixation_window_restarts_on_jump():
    w = FixationWindow(CFG)
    for x in stream([100] * 5):
        w.feed(x)
    open_fix = w.feed(GazeSample(200.0, 400.0, 500.0))
    assert open_fix is not None and open_fix.age_ms == 0.0
    assert open_fix.sample_count == 1


def test_fixation_window_closes_on_reject():
    w = FixationWindow(CFG, accept=lambda s: s.y_px > 776)
    assert w.feed(GazeSample(0.0, 100, 800)) is not None
    assert w.feed(GazeSample(40.0, 100, 500)) is None
    assert not w.open
