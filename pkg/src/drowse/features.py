"""The four biometric features, computed per label window.

A label window spans from one KSS answer (or session start) to the next
KSS answer, so every telemetry event is used exactly once.  Windows are
half-open [start, end): the answer that closes a window supplies its label.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from drowse.events import (
    DELETE_KEYS,
    InputEvent,
    KeyDown,
    KeyUp,
    KssAnswered,
    MouseDown,
    MouseMove,
    MouseUp,
    SessionLog,
)

# mouse stream segmentation: a pause longer than this starts a new movement
SEGMENT_GAP_MS = 300
# minimum points for a segment to contribute to mouse_average_error
SEGMENT_MIN_POINTS = 3
# windows shorter than this carry too little behavior to label
MIN_WINDOW_MS = 30_000

FEATURE_NAMES = ("mouse_avg_error", "mouse_velocity", "delete_rate", "key_down_time")

CSV_COLUMNS = (
    "subject_id",
    "window_start_ms",
    "window_end_ms",
    "mouse_avg_error",
    "mouse_velocity",
    "delete_rate",
    "key_down_time",
    "kss_raw",
    "kss_diff",
)


class NoKssReports(ValueError):
    """Log contains no KssAnswered events to anchor labels on."""


@dataclass(frozen=True)
class FeatureVector:
    mouse_avg_error: float  # pixels
    mouse_velocity: float  # pixels/second
    delete_rate: float  # presses/minute
    key_down_time: float  # milliseconds, mean dwell

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mouse_avg_error, self.mouse_velocity, self.delete_rate, self.key_down_time)


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    kss_raw: int  # 1..9
    kss_diff: int  # this report minus the subject's first report
    window_start_ms: int
    window_end_ms: int
    subject_id: str


@dataclass(frozen=True)
class ExtractResult:
    samples: tuple[LabeledSample, ...]
    dropped_missing: int  # windows with no dwell pairs
    dropped_short: int  # windows under MIN_WINDOW_MS


def _in_window(t: int, window: tuple[int, int]) -> bool:
    return window[0] <= t < window[1]


def key_down_time(events: Sequence[InputEvent], window: tuple[int, int]) -> float | None:
    """Mean dwell over per-key matched Down/Up pairs whose Down lies in window.

    Returns None when no pair qualifies (a missing value, not zero dwell).
    """
    open_downs: dict[str, int] = {}
    dwells: list[int] = []
    for event in events:
        if isinstance(event, KeyDown):
            open_downs[event.key] = event.t  # a re-press orphans the earlier down
        elif isinstance(event, KeyUp):
            down_t = open_downs.pop(event.key, None)
            if down_t is not None and _in_window(down_t, window):
                dwells.append(event.t - down_t)
    if not dwells:
        return None
    return sum(dwells) / len(dwells)


def delete_rate(events: Sequence[InputEvent], window: tuple[int, int]) -> float:
    """Backspace/Delete presses per minute of window."""
    count = sum(
        1
        for event in events
        if isinstance(event, KeyDown) and event.key in DELETE_KEYS and _in_window(event.t, window)
    )
    minutes = (window[1] - window[0]) / 60_000.0
    return count / minutes


def mouse_velocity(events: Sequence[InputEvent], window: tuple[int, int]) -> float:
    """Path length over elapsed time across all moves in window; 0 for < 2 moves."""
    moves = [e for e in events if isinstance(e, MouseMove) and _in_window(e.t, window)]
    if len(moves) < 2:
        return 0.0
    elapsed_ms = moves[-1].t - moves[0].t
    if elapsed_ms <= 0:
        return 0.0
    path = 0.0
    for a, b in zip(moves, moves[1:]):
        path += math.hypot(b.x - a.x, b.y - a.y)
    return path / (elapsed_ms / 1000.0)


def _point_line_distance(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> float:
    dx, dy = bx - ax, by - ay
    length = math.hypot(dx, dy)
    if length == 0.0:
        return math.hypot(px - ax, py - ay)
    return abs(dx * (py - ay) - dy * (px - ax)) / length


def _segment_error(segment: Sequence[MouseMove]) -> float | None:
    if len(segment) < SEGMENT_MIN_POINTS:
        return None
    ax, ay = segment[0].x, segment[0].y
    bx, by = segment[-1].x, segment[-1].y
    interior = segment[1:-1]
    total = sum(_point_line_distance(p.x, p.y, ax, ay, bx, by) for p in interior)
    return total / len(interior)


def mouse_average_error(events: Sequence[InputEvent], window: tuple[int, int]) -> float:
    """Mean perpendicular deviation from per-segment straight-line paths.

    The move stream is cut at clicks and at pauses > SEGMENT_GAP_MS; segments
    need >= SEGMENT_MIN_POINTS points.  0 when nothing qualifies.
    """
    segment: list[MouseMove] = []
    segment_errors: list[float] = []

    def close_segment() -> None:
        error = _segment_error(segment)
        if error is not None:
            segment_errors.append(error)
        segment.clear()

    for event in events:
        if not _in_window(event.t, window):
            continue
        if isinstance(event, MouseMove):
            if segment and event.t - segment[-1].t > SEGMENT_GAP_MS:
                close_segment()
            segment.append(event)
        elif isinstance(event, (MouseDown, MouseUp)):
            close_segment()
    close_segment()
    if not segment_errors:
        return 0.0
    return sum(segment_errors) / len(segment_errors)


def kss_difference_series(log: SessionLog) -> list[tuple[int, int, int]]:
    """(timestamp, raw score, score minus the subject's first score) per answer."""
    series: list[tuple[int, int, int]] = []
    first: int | None = None
    for event in log.events:
        if isinstance(event, KssAnswered):
            if first is None:
                first = event.score
            series.append((event.t, event.score, event.score - first))
    if not series:
        raise NoKssReports(f"session {log.session_id} has no KSS answers")
    return series


def compute_features(events: Sequence[InputEvent], window: tuple[int, int]) -> FeatureVector | None:
    """All four features over one window; None when dwell is missing."""
    dwell = key_down_time(events, window)
    if dwell is None:
        return None
    return FeatureVector(
        mouse_avg_error=mouse_average_error(events, window),
        mouse_velocity=mouse_velocity(events, window),
        delete_rate=delete_rate(events, window),
        key_down_time=dwell,
    )


def extract_samples(log: SessionLog) -> ExtractResult:
    """One labeled sample per KSS answer, windows abutting back to session start."""
    series = kss_difference_series(log)
    samples: list[LabeledSample] = []
    dropped_missing = 0
    dropped_short = 0
    window_start = 0
    for answer_t, raw, diff in series:
        window = (window_start, answer_t)
        window_start = answer_t
        if window[1] - window[0] < MIN_WINDOW_MS:
            dropped_short += 1
            continue
        features = compute_features(log.events, window)
        if features is None:
            dropped_missing += 1
            continue
        samples.append(
            LabeledSample(
                features=features,
                kss_raw=raw,
                kss_diff=diff,
                window_start_ms=window[0],
                window_end_ms=window[1],
                subject_id=log.subject_id,
            )
        )
    return ExtractResult(tuple(samples), dropped_missing, dropped_short)


def write_features_csv(fh: TextIO, samples: Iterable[LabeledSample]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in samples:
        writer.writerow(
            [
                s.subject_id,
                s.window_start_ms,
                s.window_end_ms,
                repr(s.features.mouse_avg_error),
                repr(s.features.mouse_velocity),
                repr(s.features.delete_rate),
                repr(s.features.key_down_time),
                s.kss_raw,
                s.kss_diff,
            ]
        )


def read_features_csv(fh: TextIO) -> list[LabeledSample]:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != list(CSV_COLUMNS):
        raise ValueError(f"bad features CSV header: {header}")
    samples = []
    for row in reader:
        if not row:
            continue
        samples.append(
            LabeledSample(
                features=FeatureVector(
                    mouse_avg_error=float(row[3]),
                    mouse_velocity=float(row[4]),
                    delete_rate=float(row[5]),
                    key_down_time=float(row[6]),
                ),
                kss_raw=int(row[7]),
                kss_diff=int(row[8]),
                window_start_ms=int(row[1]),
                window_end_ms=int(row[2]),
                subject_id=row[0],
            )
        )
    return samples
