"""Gaze-interaction engine for touch-free page scrolling.

Four detector state machines (gesture, dwell, pursuit and implicit
reading-speed) over timestamped gaze streams, with calibration, synthetic
sitting/walking gaze simulation, persisted replayable sessions, analytics
and a live session service.
"""

__version__ = "0.1.0"

from .core import (CarriedLine, DocumentModel, EndOfDocumentError, GazeSample,
                   GeometryError, Page, Region, SampleKind, ScreenGeometry,
                   ScrollCause, ScrollEvent, build_document, classify_region,
                   classify_sample, cm_to_px, last_line_screen_y, px_to_cm,
                   turn_page)
from .stream import (Fixation, FixationWindow, OpenFixation, StreamConfig,
                     StreamOrderError, detect_fixations, smooth)
from .techniques import (Abort, AutoScrollDetector, ConfigError,
                         DetectorEvent, EyeSwipeDetector, EyeSwipeState,
                         HitboxDetector, MovingBarDetector, Progress,
                         ReadingSpeedEstimate, Scheduled, StateChange,
                         Technique, TechniqueConfig, Trigger,
                         autoscroll_eta_ms, autoscroll_update, make_detector,
                         validate_config)
from .simulate import (GestureAnnotation, LatencyModel, NoiseModel,
                       ReaderProfile, apply_noise, delay, gaussian_floor_cm,
                       gen_reading_trace, inject_activation)
from .calibration import (CalibrationPath, Calibrator, InsufficientDataError,
                          evaluate_error, fit_calibrator, generate_dot_path)
from .analytics import (ActivationMetrics, Heatmap, RtppResult, ScanPath,
                        heatmap, ramp_color, robustness_table, rtpp, scanpath,
                        scanpath_to_svg, score_attempts)
from .session_io import (PageBoundary, SessionHeader, SessionRecording,
                         diff_events, import_samples, read, replay, write)
from .campaign import SessionSpec, replay_events, run_campaign, run_session
from .service import PROTOCOL_VERSION, GazeSession, serve
