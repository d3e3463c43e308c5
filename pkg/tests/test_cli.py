from __future__ import annotations

import pytest

from gazescroll.cli import main
from gazescroll.session_io import read


def run_cli(*argv):
    return main(list(argv))


def test_version_flag(capsys):
    assert run_cli("--version") == 0
    out = capsys.readouterr().out
    assert "gazescroll" in out and "protocol 1" in out


def test_simulate_usage_errors(tmp_path):
    assert run_cli("simulate", "--seeds", "0", "--out", str(tmp_path)) == 1
    assert run_cli("simulate", "--technique", "warp",
                   "--out", str(tmp_path)) == 1
    assert run_cli("simulate", "--mobility", "flying",
                   "--out", str(tmp_path)) == 1
    assert run_cli("simulate", "--set", "nonsense",
                   "--out", str(tmp_path)) == 1
    assert run_cli("simulate", "--set", "hitbox_dwell_ms=9999",
                   "--out", str(tmp_path)) == 1


def test_simulate_eyeswipe_sitting_clean(tmp_path, capsys):
    code = run_cli("simulate", "--technique", "eyeswipe",
                   "--mobility", "sitting", "--seeds", "10",
                   "--out", str(tmp_path))
    assert code == 0
    files = sorted(tmp_path.glob("*.session"))
    assert len(files) == 10
    out = capsys.readouterr().out
    assert "eyeswipe" in out
    row = [l for l in out.splitlines() if l.startswith("eyeswipe")][0]
    cols = row.split()
    assert cols[2] == "10"  # attempts
    assert cols[3] == "10"  # true triggers
    assert cols[4] == "0"   # false triggers


def test_simulate_respects_config_override(tmp_path):
    code = run_cli("simulate", "--technique", "hitbox", "--mobility",
                   "sitting", "--seeds", "1", "--out", str(tmp_path),
                   "--set", "hitbox_dwell_ms=1500")
    assert code == 0
    rec, _ = read(next(tmp_path.glob("*.session")))
    assert rec.header.config.hitbox_dwell_ms == 1500.0
    assert rec.header.seed == 0


def test_analyze_outputs(tmp_path, capsys):
    sess_dir = tmp_path / "sessions"
    run_cli("simulate", "--technique", "hitbox", "--mobility", "sitting",
            "--seeds", "1", "--pages", "3", "--out", str(sess_dir))
    session = next(sess_dir.glob("*.session"))
    out_dir = tmp_path / "analysis"
    code = run_cli("analyze", str(session), "--heatmap", "--scanpath",
                   "--rtpp", "--report", "--out", str(out_dir))
    assert code == 0
    stem = session.stem
    assert (out_dir / f"{stem}.heatmap.pgm").exists()
    assert (out_dir / f"{stem}.heatmap.txt").exists()
    assert (out_dir / f"{stem}.scanpath.svg").exists()
    out = capsys.readouterr().out
    assert "mean" in out and "hitbox" in out


def test_analyze_requires_an_output(tmp_path):
    sess_dir = tmp_path / "s"
    run_cli("simulate", "--technique", "hitbox", "--mobility", "sitting",
            "--seeds", "1", "--out", str(sess_dir))
    session = next(sess_dir.glob("*.session"))
    assert run_cli("analyze", str(session), "--out", str(tmp_path)) == 1


def test_analyze_missing_file_is_io_error(tmp_path, capsys):
    code = run_cli("analyze", str(tmp_path / "absent.session"), "--rtpp",
                   "--out", str(tmp_path))
    assert code == 3
    assert "absent.session" in capsys.readouterr().err


def test_calibrate_eval_paired_and_on_target(capsys):
    assert run_cli("calibrate-eval", "--noise", "sitting",
                   "--trials", "20") == 0
    lines = [l.split() for l in capsys.readouterr().out.splitlines()[1:]]
    trials = [(float(r), float(c)) for _, r, c in lines[:-1]]
    assert len(trials) == 20
    assert all(c <= r for r, c in trials)  # calibrated never worse
    mean_cal = float(lines[-1][2])
    assert mean_cal == pytest.approx(0.95, rel=0.10)


def test_calibrate_eval_walking_near_target(capsys):
    assert run_cli("calibrate-eval", "--noise", "walking",
                   "--trials", "20") == 0
    mean_cal = float(capsys.readouterr().out.splitlines()[-1].split()[2])
    assert mean_cal == pytest.approx(1.98, rel=0.10)


def test_calibrate_eval_zero_noise(capsys):
    assert run_cli("calibrate-eval", "--noise", "none", "--trials", "2") == 0
    mean_cal = float(capsys.readouterr().out.splitlines()[-1].split()[2])
    assert mean_cal < 0.02


def test_calibrate_eval_usage_error():
    assert run_cli("calibrate-eval", "--trials", "0") == 1


def test_replay_ok_and_diverged(tmp_path, capsys):
    sess_dir = tmp_path / "s"
    run_cli("simulate", "--technique", "hitbox", "--mobility", "sitting",
            "--seeds", "1", "--out", str(sess_dir))
    session = next(sess_dir.glob("*.session"))
    assert run_cli("replay", str(session)) == 0
    assert "replay OK" in capsys.readouterr().out

    # altering the dwell in the header makes replay diverge
    text = session.read_text()
    session.write_text(text.replace('"hitbox_dwell_ms":1000.0',
                                    '"hitbox_dwell_ms":1500.0'))
    assert run_cli("replay", str(session)) == 2
    assert "DIVERGED" in capsys.readouterr().out


def test_serve_port_in_use_is_io_error(capsys):
    import socket

    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        sock.listen(1)
        port = sock.getsockname()[1]
        assert run_cli("serve", "--port", str(port)) == 3
    assert "cannot listen" in capsys.readouterr().err
