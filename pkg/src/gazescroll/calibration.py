"""Moving-dot calibration: boundary target path generation, a per-axis
polynomial regression calibrator mapping raw to true screen coordinates, and
error evaluation in centimeters."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import GazeSample, SampleKind, ScreenGeometry, px_to_cm

PATH_POINTS = 125
PATH_DURATION_MS = 5000.0
PATH_RATE_HZ = 25.0

# Effectively unregularized: the penalty only guards the linear solve. Any
# larger value visibly shrinks an exact polynomial fit, which would break the
# noise-free recovery contract.
RIDGE_LAMBDA = 1e-8

CalPair = tuple[GazeSample, tuple[float, float]]


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class CalibrationPath:
    """Target positions for the guiding dot, ordered along the screen
    boundary."""

    points: tuple[tuple[float, float], ...]
    duration_ms: float = PATH_DURATION_MS
    rate_hz: float = PATH_RATE_HZ


def generate_dot_path(g: ScreenGeometry) -> CalibrationPath:
    """125 targets uniformly spaced by arc length along the screen perimeter,
    clockwise from the top-left corner."""
    w, h = float(g.width_px), float(g.height_px)
    perimeter = 2.0 * (w + h)
    spacing = perimeter / PATH_POINTS
    pts = []
    for k in range(PATH_POINTS):
        d = k * spacing
        if d < w:
            pts.append((d, 0.0))
        elif d < w + h:
            pts.append((w, d - w))
        elif d < 2.0 * w + h:
            pts.append((w - (d - w - h), h))
        else:
            pts.append((0.0, h - (d - 2.0 * w - h)))
    return CalibrationPath(points=tuple(pts))


def _poly2_features(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.column_stack([x, y, x * x, x * y, y * y])


def _affine_features(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.column_stack([x, y])


@dataclass(frozen=True, slots=True)
class Calibrator:
    """Per-axis regression from raw to corrected screen coordinates.

    Immutable once fitted; corrected points are never clamped to the screen.
    ``kind`` is "identity", "poly2-ridge" or "affine-ridge".
    """

    kind: str
    feature_mean: tuple[float, ...] = ()
    feature_std: tuple[float, ...] = ()
    weights_x: tuple[float, ...] = ()
    weights_y: tuple[float, ...] = ()
    intercept_x: float = 0.0
    intercept_y: float = 0.0
    training_error_cm: float = 0.0

    @classmethod
    def identity(cls) -> "Calibrator":
        return cls(kind="identity")

    def _features(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == "poly2-ridge":
            return _poly2_features(x, y)
        if self.kind == "affine-ridge":
            return _affine_features(x, y)
        raise ValueError(f"unknown calibrator kind: {self.kind}")

    def correct(self, x_px: float, y_px: float) -> tuple[float, float]:
        if self.kind == "identity":
            return x_px, y_px
        z = (self._features(np.array([x_px]), np.array([y_px]))[0]
             - np.array(self.feature_mean)) / np.array(self.feature_std)
        cx = self.intercept_x + float(z @ np.array(self.weights_x))
        cy = self.intercept_y + float(z @ np.array(self.weights_y))
        return cx, cy

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "feature_mean": list(self.feature_mean),
            "feature_std": list(self.feature_std),
            "weights_x": list(self.weights_x),
            "weights_y": list(self.weights_y),
            "intercept_x": self.intercept_x,
            "intercept_y": self.intercept_y,
            "training_error_cm": self.training_error_cm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Calibrator":
        return cls(
            kind=d["kind"],
            feature_mean=tuple(d.get("feature_mean", ())),
            feature_std=tuple(d.get("feature_std", ())),
            weights_x=tuple(d.get("weights_x", ())),
            weights_y=tuple(d.get("weights_y", ())),
            intercept_x=d.get("intercept_x", 0.0),
            intercept_y=d.get("intercept_y", 0.0),
            training_error_cm=d.get("training_error_cm", 0.0),
        )


def _ridge(z: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    mean = target.mean()
    p = z.shape[1]
    w = np.linalg.solve(z.T @ z + RIDGE_LAMBDA * np.eye(p),
                        z.T @ (target - mean))
    return w, float(mean)


def fit_calibrator(pairs: Sequence[CalPair],
                   g: ScreenGeometry = ScreenGeometry()) -> Calibrator:
    """Fit the raw-to-true correction from calibration pairs.

    Defaults to degree-2 polynomial features per axis; collinear or otherwise
    rank-deficient inputs fall back to an affine fit. Deterministic for
    identical input.
    """
    if len(pairs) < 25:
        raise InsufficientDataError(
            f"calibration needs at least 25 pairs, got {len(pairs)}")
    raw_x = np.array([s.x_px for s, _ in pairs])
    raw_y = np.array([s.y_px for s, _ in pairs])
    true_x = np.array([t[0] for _, t in pairs])
    true_y = np.array([t[1] for _, t in pairs])

    for kind, make in (("poly2-ridge", _poly2_features),
                       ("affine-ridge", _affine_features)):
        feats = make(raw_x, raw_y)
        mean = feats.mean(axis=0)
        std = feats.std(axis=0)
        std[std == 0.0] = 1.0
        z = (feats - mean) / std
        if kind == "poly2-ridge" and np.linalg.matrix_rank(z) < z.shape[1]:
            continue
        wx, bx = _ridge(z, true_x)
        wy, by = _ridge(z, true_y)
        pred_x = bx + z @ wx
        pred_y = by + z @ wy
        err_cm = px_to_cm(g, float(np.mean(
            np.hypot(pred_x - true_x, pred_y - true_y))))
        return Calibrator(
            kind=kind,
            feature_mean=tuple(mean), feature_std=tuple(std),
            weights_x=tuple(wx), weights_y=tuple(wy),
            intercept_x=bx, intercept_y=by,
            training_error_cm=err_cm,
        )
    raise AssertionError("unreachable: affine fit never rejects")


def apply(c: Calibrator, s: GazeSample,
          g: ScreenGeometry = ScreenGeometry()) -> GazeSample:
    """Correct one raw sample. Off-screen samples pass through uncorrected;
    a corrected point landing outside the screen keeps its coordinates but
    loses the on-screen flag."""
    if s.kind is not SampleKind.RAW:
        raise ValueError("sample is already calibrated")
    if not s.on_screen:
        return replace(s, kind=SampleKind.CALIBRATED)
    cx, cy = c.correct(s.x_px, s.y_px)
    return replace(s, x_px=cx, y_px=cy, on_screen=g.contains(cx, cy),
                   kind=SampleKind.CALIBRATED)


def evaluate_error(c: Calibrator, pairs: Sequence[CalPair],
                   g: ScreenGeometry = ScreenGeometry(),
                   ) -> tuple[float, list[float]]:
    """Mean and per-point Euclidean error, in centimeters, of the corrected
    raw samples against their true targets."""
    if not pairs:
        raise ValueError("evaluate_error needs at least one pair")
    per_point = []
    for s, (tx, ty) in pairs:
        cx, cy = c.correct(s.x_px, s.y_px)
        per_point.append(px_to_cm(g, float(np.hypot(cx - tx, cy - ty))))
    return float(np.mean(per_point)), per_point
