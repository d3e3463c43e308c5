"""Operator entry point: simulation campaigns, session analytics, calibration
evaluation, replay diffing and the live service.

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (format_metrics_table, heatmap, heatmap_to_grid_text,
                        heatmap_to_pgm, merge_metrics, rtpp, scanpath,
                        scanpath_to_svg)
from .calibration import (Calibrator, evaluate_error, fit_calibrator,
                          generate_dot_path)
from .campaign import SessionSpec, replay_events, run_session, session_metrics
from .core import GazeSample, ScreenGeometry
from .service import PROTOCOL_VERSION, serve
from .session_io import SessionFormatError, diff_events, read, write
from .simulate import NoiseModel, apply_noise, gaussian_floor_cm
from .stream import detect_fixations, smooth
from .techniques import ConfigError, Technique, TechniqueConfig, \
    validate_config

USAGE_ERROR = 1
DATA_ERROR = 2
IO_ERROR = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _parse_overrides(pairs: list[str]) -> TechniqueConfig:
    overrides: dict = {}
    base = TechniqueConfig()
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise CliError(f"--set expects key=value, got {pair!r}",
                           USAGE_ERROR)
        if key not in base.__dataclass_fields__:
            raise CliError(f"unknown config field {key!r}", USAGE_ERROR)
        try:
            overrides[key] = float(value)
        except ValueError as e:
            raise CliError(f"bad value for {key}: {value!r}", USAGE_ERROR) \
                from e
    cfg = base.replace_fields(**overrides)
    problems = validate_config(cfg)
    if problems:
        raise CliError("invalid config: " + "; ".join(problems), USAGE_ERROR)
    return cfg


def _techniques(name: str) -> list[Technique]:
    if name == "all":
        return list(Technique)
    try:
        return [Technique(name)]
    except ValueError as e:
        raise CliError(f"unknown technique {name!r} (use "
                       f"{', '.join(t.value for t in Technique)} or all)",
                       USAGE_ERROR) from e


def _mobilities(name: str) -> list[str]:
    if name == "both":
        return ["sitting", "walking"]
    if name in ("sitting", "walking", "none"):
        return [name]
    raise CliError(f"unknown mobility {name!r}", USAGE_ERROR)


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.seeds <= 0:
        raise CliError("--seeds must be positive", USAGE_ERROR)
    cfg = _parse_overrides(args.set or [])
    techniques = _techniques(args.technique)
    mobilities = _mobilities(args.mobility)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CliError(f"cannot create {out_dir}: {e}", IO_ERROR) from e

    per_group: dict[tuple[Technique, str], list] = {}
    for tech in techniques:
        for mob in mobilities:
            for seed in range(args.seed_base, args.seed_base + args.seeds):
                rec = run_session(SessionSpec(
                    technique=tech, mobility=mob, seed=seed, config=cfg,
                    n_pages=args.pages))
                name = f"{tech.value}-{mob}-{seed:04d}.session"
                try:
                    write(rec, out_dir / name)
                except OSError as e:
                    raise CliError(str(e), IO_ERROR) from e
                per_group.setdefault((tech, mob), []).append(
                    session_metrics(rec))
    rows = [merge_metrics(parts) for parts in per_group.values()]
    rows.sort(key=lambda m: (-m.failure_rate, m.technique.value, m.mobility))
    print(format_metrics_table(rows))
    print(f"\n{sum(len(v) for v in per_group.values())} session files "
          f"written to {out_dir}")
    return 0


def _load_sessions(paths: list[str]):
    sessions = []
    for p in paths:
        try:
            rec, skipped = read(p)
        except OSError as e:
            raise CliError(str(e), IO_ERROR) from e
        except SessionFormatError as e:
            raise CliError(str(e), DATA_ERROR) from e
        if skipped:
            print(f"warning: {p}: skipped {skipped} unknown records",
                  file=sys.stderr)
        sessions.append((Path(p), rec))
    return sessions


def cmd_analyze(args: argparse.Namespace) -> int:
    if not (args.heatmap or args.scanpath or args.rtpp or args.report):
        raise CliError("nothing to do: pass --heatmap/--scanpath/--rtpp/"
                       "--report", USAGE_ERROR)
    sessions = _load_sessions(args.sessions)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_group: dict = {}
    for path, rec in sessions:
        g = rec.header.geometry
        stem = path.stem
        samples = rec.samples()
        if args.heatmap:
            h = heatmap(samples, g, cell_px=args.cell_px)
            (out_dir / f"{stem}.heatmap.pgm").write_text(heatmap_to_pgm(h))
            (out_dir / f"{stem}.heatmap.txt").write_text(
                heatmap_to_grid_text(h))
        if args.scanpath:
            fixations = detect_fixations(smooth(samples, rec.header.stream),
                                         rec.header.stream)
            svg = scanpath_to_svg(scanpath(fixations), g)
            (out_dir / f"{stem}.scanpath.svg").write_text(svg)
        if args.rtpp:
            if samples:
                result = rtpp(rec.scrolls(), samples[0].t_ms,
                              samples[-1].t_ms)
            else:
                result = rtpp(rec.scrolls(), 0.0)
            durs = " ".join(f"{d:.2f}" for d in result.per_page_s)
            print(f"{stem}: pages {len(result.per_page_s)} "
                  f"mean {result.mean_s:.2f}s sd {result.sd_s:.2f}s "
                  f"[{durs}]")
        if args.report:
            key = (rec.header.technique, rec.header.noise_label)
            per_group.setdefault(key, []).append(session_metrics(rec))
    if args.report:
        rows = [merge_metrics(parts) for parts in per_group.values()]
        rows.sort(key=lambda m: (-m.failure_rate, m.technique.value,
                                 m.mobility))
        print(format_metrics_table(rows))
    return 0


def calibration_trial(noise_label: str, seed: int,
                      g: ScreenGeometry = ScreenGeometry(),
                      ) -> tuple[float, float]:
    """One calibration-then-use trial; returns (raw, calibrated) mean error.

    The calibrator is fitted on a guided dot pass, a controlled task with
    only fixation-grade jitter. Errors are then measured on a fresh pass
    carrying the mobility label's full noise floor, mirroring how the
    session-start calibration is exercised during actual reading.
    """
    path = generate_dot_path(g)
    frame_ms = 1000.0 / path.rate_hz
    truth = [GazeSample(i * frame_ms, x, y)
             for i, (x, y) in enumerate(path.points)]
    # systematic warp standing in for the uncalibrated estimator error; the
    # intrinsic estimator noise is added before it, so the post-calibration
    # floor is the noise itself
    scale, shift = 1.12, (70.0, -50.0)

    def observe(noise: NoiseModel, seed_: int) -> list[GazeSample]:
        jittered = apply_noise(truth, noise, g, seed=seed_)
        return [GazeSample(s.t_ms, scale * s.x_px + shift[0],
                           scale * s.y_px + shift[1]) for s in jittered]

    fit_jitter = NoiseModel(label="fit",
                            sigma_cm=NoiseModel.for_label(noise_label).sigma_cm)
    fit_pass = observe(fit_jitter, seed * 2)
    calibrator = fit_calibrator(list(zip(fit_pass, path.points)), g)

    use_noise = NoiseModel(label="use",
                           sigma_cm=gaussian_floor_cm(noise_label))
    use_pass = observe(use_noise, seed * 2 + 1)
    pairs = list(zip(use_pass, path.points))
    raw_mean, _ = evaluate_error(Calibrator.identity(), pairs, g)
    cal_mean, _ = evaluate_error(calibrator, pairs, g)
    return raw_mean, cal_mean


def cmd_calibrate_eval(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise CliError("--trials must be >= 1", USAGE_ERROR)
    raw_means, cal_means = [], []
    print(f"{'trial':>5s} {'raw-cm':>8s} {'calibrated-cm':>13s}")
    for trial in range(args.trials):
        raw_mean, cal_mean = calibration_trial(args.noise,
                                               args.seed_base + trial)
        raw_means.append(raw_mean)
        cal_means.append(cal_mean)
        print(f"{trial:5d} {raw_mean:8.3f} {cal_mean:13.3f}")
    print(f"{'mean':>5s} {np.mean(raw_means):8.3f} "
          f"{np.mean(cal_means):13.3f}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    sessions = _load_sessions([args.session])
    _, rec = sessions[0]
    events = replay_events(rec)
    divergence = diff_events(rec.events(), events)
    if args.verbose:
        for e in events:
            print(e)
    if divergence is None:
        print(f"replay OK: {len(events)} events identical to the recording")
        return 0
    print(f"replay DIVERGED: {divergence}")
    return DATA_ERROR


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        asyncio.run(serve(host=args.host, port=args.port,
                          record_dir=args.record))
    except KeyboardInterrupt:
        pass
    except OSError as e:
        raise CliError(f"cannot listen on {args.host}:{args.port}: {e}",
                       IO_ERROR) from e
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazescroll",
        description="Gaze-driven page scrolling: simulate, analyze, "
                    "calibrate, replay and serve.")
    parser.add_argument("--version", action="version",
                        version=f"gazescroll {__version__} "
                                f"(protocol {PROTOCOL_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run seeded simulation campaigns")
    p.add_argument("--technique", default="all",
                   help="eyeswipe|hitbox|moving_bar|auto_scroll|all")
    p.add_argument("--mobility", default="both",
                   help="sitting|walking|none|both")
    p.add_argument("--seeds", type=int, default=10,
                   help="number of sessions per technique and mobility")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--pages", type=int, default=1)
    p.add_argument("--out", default="sessions")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a technique config field")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="derive artifacts from session files")
    p.add_argument("sessions", nargs="+")
    p.add_argument("--heatmap", action="store_true")
    p.add_argument("--scanpath", action="store_true")
    p.add_argument("--rtpp", action="store_true")
    p.add_argument("--report", action="store_true")
    p.add_argument("--cell-px", type=float, default=10.0)
    p.add_argument("--out", default="analysis")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("calibrate-eval",
                       help="raw vs calibrated error over seeded trials")
    p.add_argument("--noise", default="sitting",
                   help="sitting|walking|none")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed-base", type=int, default=0)
    p.set_defaults(func=cmd_calibrate_eval)

    p = sub.add_parser("replay", help="re-run a recorded session and diff "
                                      "its event log")
    p.add_argument("session")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the WebSocket session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--record", metavar="DIR", default=None,
                   help="record every session into DIR")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage problems; remap to the documented code
        return 0 if e.code in (0, None) else USAGE_ERROR
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ConfigError as e:
        print(f"error: invalid config: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
