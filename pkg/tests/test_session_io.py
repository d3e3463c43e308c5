from __future__ import annotations

from pathlib import Path

import pytest

from gazescroll.core import GazeSample, ScrollCause, ScrollEvent
from gazescroll.session_io import (MAGIC, PageBoundary, SessionFormatError,
                                   SessionHeader, SessionRecording,
                                   diff_events, import_samples, read, replay,
                                   write)
from gazescroll.simulate import GestureAnnotation
from gazescroll.techniques import (Abort, DetectorEvent, Progress, Scheduled,
                                   StateChange, Technique, Trigger)


def small_recording():
    rec = SessionRecording(header=SessionHeader(technique=Technique.HITBOX,
                                                noise_label="sitting",
                                                seed=7))
    rec.append(PageBoundary(0.0, 0))
    rec.append(GestureAnnotation(Technique.HITBOX, 100.0, 1100.0))
    rec.append(GazeSample(200.0, 214.0, 851.0))
    rec.append(DetectorEvent(200.0, Technique.HITBOX, Progress(0.25)))
    rec.append(DetectorEvent(240.0, Technique.HITBOX, StateChange("a", "b")))
    rec.append(DetectorEvent(280.0, Technique.HITBOX, Abort("fixation_lost")))
    rec.append(DetectorEvent(320.0, Technique.AUTO_SCROLL, Scheduled(9000.0)))
    rec.append(GazeSample(360.0, 10.0, 10.0, on_screen=False))
    rec.append(DetectorEvent(400.0, Technique.HITBOX, Trigger()))
    rec.append(ScrollEvent(400.0, 0, 1, ScrollCause.HITBOX))
    rec.append(PageBoundary(400.0, 1))
    return rec


def test_round_trip_equality(tmp_path: Path):
    rec = small_recording()
    p = tmp_path / "a.session"
    write(rec, p)
    back, skipped = read(p)
    assert skipped == 0
    assert back.header == rec.header
    assert back.records == rec.records


def test_round_trip_byte_identical(tmp_path: Path):
    rec = small_recording()
    p1, p2 = tmp_path / "a.session", tmp_path / "b.session"
    write(rec, p1)
    back, _ = read(p1)
    write(back, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_empty_body_header_only(tmp_path: Path):
    rec = SessionRecording(header=SessionHeader())
    p = tmp_path / "empty.session"
    write(rec, p)
    text = p.read_text()
    assert text.startswith(MAGIC) and len(text.splitlines()) == 1
    back, _ = read(p)
    assert back.records == []


def test_write_refuses_out_of_order(tmp_path: Path):
    rec = SessionRecording(header=SessionHeader())
    rec.append(GazeSample(100.0, 1, 1))
    rec.append(GazeSample(50.0, 1, 1))
    with pytest.raises(SessionFormatError):
        write(rec, tmp_path / "bad.session")


def test_read_reports_line_number_of_malformed_record(tmp_path: Path):
    rec = small_recording()
    p = tmp_path / "a.session"
    write(rec, p)
    lines = p.read_text().splitlines()
    lines[3] = lines[3][:-5]  # truncate a record mid-JSON
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(SessionFormatError, match="line 4"):
        read(p)


def test_read_rejects_future_version(tmp_path: Path):
    p = tmp_path / "future.session"
    write(small_recording(), p)
    lines = p.read_text().splitlines()
    lines[0] = lines[0].replace(f"{MAGIC} 1 ", f"{MAGIC} 99 ", 1)
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(SessionFormatError, match="version 99"):
        read(p)


def test_read_rejects_missing_magic(tmp_path: Path):
    p = tmp_path / "x.session"
    p.write_text("not a session\n")
    with pytest.raises(SessionFormatError, match="header"):
        read(p)


def test_read_skips_unknown_kinds_with_count(tmp_path: Path):
    p = tmp_path / "a.session"
    write(small_recording(), p)
    lines = p.read_text().splitlines()
    lines.insert(2, '{"k":"blink","t":50.0}')
    p.write_text("\n".join(lines) + "\n")
    back, skipped = read(p)
    assert skipped == 1
    assert len(back.records) == len(small_recording().records)


def test_read_rejects_non_monotone(tmp_path: Path):
    p = tmp_path / "a.session"
    write(small_recording(), p)
    lines = p.read_text().splitlines()
    lines.append('{"k":"sample","t":0.5,"x":1.0,"y":1.0,"on":true,'
                 '"kind":"raw"}')
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(SessionFormatError, match="non-monotone"):
        read(p)


def test_missing_file_errors_with_path(tmp_path: Path):
    missing = tmp_path / "nope.session"
    with pytest.raises(OSError, match="nope.session"):
        read(missing)


def test_write_failure_names_path(tmp_path: Path):
    dest = tmp_path / "no-such-dir" / "x.session"
    with pytest.raises(OSError, match="x.session"):
        write(small_recording(), dest)


def test_calibrator_round_trips_in_header(tmp_path: Path):
    from gazescroll.calibration import Calibrator, fit_calibrator, \
        generate_dot_path
    from gazescroll.core import GazeSample as GS, ScreenGeometry

    g = ScreenGeometry()
    pts = generate_dot_path(g).points
    fitted = fit_calibrator([(GS(i * 40.0, x + 10, y - 5), (x, y))
                             for i, (x, y) in enumerate(pts)], g)
    rec = SessionRecording(header=SessionHeader(calibrator=fitted.to_dict()))
    p = tmp_path / "cal.session"
    write(rec, p)
    back, _ = read(p)
    assert Calibrator.from_dict(back.header.calibrator) == fitted


def test_replay_preserves_gaps_scaled():
    rec = SessionRecording(header=SessionHeader())
    for i in range(5):
        rec.append(GazeSample(i * 40.0, 1, 1))
    sleeps: list[float] = []
    out = list(replay(rec, speed_factor=2.0, sleep=sleeps.append))
    assert [s.t_ms for s in out] == [0.0, 40.0, 80.0, 120.0, 160.0]
    assert sleeps == pytest.approx([0.02] * 4)  # 40 ms gaps halved


def test_replay_speed_zero_never_sleeps():
    rec = SessionRecording(header=SessionHeader())
    for i in range(5):
        rec.append(GazeSample(i * 40.0, 1, 1))
    sleeps: list[float] = []
    list(replay(rec, speed_factor=0.0, sleep=sleeps.append))
    assert sleeps == []


def test_diff_events_reports_divergence():
    a = [DetectorEvent(0.0, Technique.HITBOX, Progress(0.1)),
         DetectorEvent(40.0, Technique.HITBOX, Trigger())]
    b = [DetectorEvent(0.0, Technique.HITBOX, Progress(0.1)),
         DetectorEvent(40.0, Technique.HITBOX, Abort("x"))]
    assert diff_events(a, a) is None
    assert "index 1" in diff_events(a, b)
    assert "counts differ" in diff_events(a, a[:1])


def test_import_shim_with_column_map(tmp_path: Path):
    csv_path = tmp_path / "ext.csv"
    csv_path.write_text("time,gx,gy,valid\n0.0,10,20,true\n0.04,11,21,false\n")
    samples = import_samples(csv_path, {"t_ms": "time", "x_px": "gx",
                                        "y_px": "gy", "on_screen": "valid"},
                             t_scale=1000.0)
    assert samples[0] == GazeSample(0.0, 10.0, 20.0, True)
    assert samples[1].t_ms == pytest.approx(40.0)
    assert not samples[1].on_screen
    with pytest.raises(ValueError, match="t_ms"):
        import_samples(csv_path, {"x_px": "gx", "y_px": "gy"})
