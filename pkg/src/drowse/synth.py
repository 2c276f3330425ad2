"""Deterministic synthetic sessions with planted drowsiness trajectories.

The generator is an oracle, not a human model: every behavioral knob is
constructed so the feature extractor recovers the planted value exactly.

* Mouse moves keep a constant point speed (every consecutive hop covers
  speed x dt), so path-length-over-elapsed-time equals the planted velocity
  for any window.
* Strokes are constant-turn arc polylines whose turn angle is solved by
  bisection until the mean perpendicular deviation equals the planted
  average error.
* KSS gaps are whole minutes inside the 3-8 minute band and delete presses
  are spread evenly, so presses-per-minute equals the planted rate.
* Dwell times are dithered around the planted mean with a cumulative-rounding
  scheme, so the window mean matches to under a millisecond.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from drowse import events as ev
from drowse.features import LabeledSample, extract_samples

MOVE_HOP_MS = 50
STROKE_HOPS = 16
STROKE_PERIOD_MS = 3_000  # stroke every 3 s; the pause between strokes splits segments
TYPING_KEYS_PER_MINUTE = 12
TYPING_GAP_MS = 240
HOME = (960.0, 540.0)
_HOME_RADIUS = 600.0
_GOLDEN_ANGLE = 2.399963229728653


@dataclass(frozen=True)
class LinearTrajectory:
    start_kss: float
    end_kss: float

    def level(self, frac: float) -> float:
        return self.start_kss + (self.end_kss - self.start_kss) * frac


@dataclass(frozen=True)
class PiecewiseTrajectory:
    """Breakpoints as (time fraction, kss) pairs; linear in between."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.breakpoints) < 2:
            raise ValueError("need at least 2 breakpoints")
        fracs = [f for f, _ in self.breakpoints]
        if fracs != sorted(fracs):
            raise ValueError("breakpoints must be sorted by time fraction")

    def level(self, frac: float) -> float:
        points = self.breakpoints
        if frac <= points[0][0]:
            return points[0][1]
        for (f0, k0), (f1, k1) in zip(points, points[1:]):
            if frac <= f1:
                if f1 == f0:
                    return k1
                return k0 + (k1 - k0) * (frac - f0) / (f1 - f0)
        return points[-1][1]


Trajectory = LinearTrajectory | PiecewiseTrajectory


@dataclass(frozen=True)
class FeatureEffect:
    base: float
    slope: float  # per KSS unit
    noise_sd: float  # per-window gaussian jitter on the target

    def target(self, level: float) -> float:
        return self.base + self.slope * level


@dataclass(frozen=True)
class SynthSpec:
    subjects: int = 18
    session_duration_s: int = 3600
    trajectory: Trajectory = LinearTrajectory(3.0, 7.0)
    trajectory_jitter: float = 0.3  # uniform per-subject jitter on the endpoints
    mouse_avg_error: FeatureEffect = FeatureEffect(base=4.0, slope=0.4, noise_sd=0.8)
    mouse_velocity: FeatureEffect = FeatureEffect(base=110.0, slope=3.0, noise_sd=9.0)
    delete_rate: FeatureEffect = FeatureEffect(base=1.0, slope=1.5, noise_sd=0.25)
    key_down_time: FeatureEffect = FeatureEffect(base=80.0, slope=4.0, noise_sd=6.0)
    baseline_offset_range: int = 2  # raw answers shift by a per-subject uniform integer
    seed: int = 42

    def __post_init__(self) -> None:
        if self.subjects < 0:
            raise ValueError("subjects must be >= 0")
        if self.session_duration_s <= 0:
            raise ValueError("session_duration_s must be > 0")
        if self.baseline_offset_range < 0:
            raise ValueError("baseline_offset_range must be >= 0")


@dataclass(frozen=True)
class PlannedWindow:
    start_ms: int
    end_ms: int
    level: float  # planted drowsiness at the window's label time
    raw_answer: int
    dwell_target: float
    velocity_target: float
    error_target: float
    delete_target: float  # realized presses/minute after integer placement


@dataclass(frozen=True)
class SessionPlan:
    subject_index: int
    baseline_offset: int
    windows: tuple[PlannedWindow, ...]


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


class _DwellStream:
    """Integer dwells whose running mean tracks a float target (cumulative rounding)."""

    def __init__(self, target: float):
        self.target = max(1.0, target)
        self.count = 0
        self.total = 0

    def next(self) -> int:
        self.count += 1
        goal = _round_half_up(self.target * self.count)
        dwell = goal - self.total
        self.total = goal
        return max(1, dwell)


def _mean_perpendicular(points: list[tuple[float, float]]) -> float:
    (ax, ay), (bx, by) = points[0], points[-1]
    dx, dy = bx - ax, by - ay
    chord = math.hypot(dx, dy)
    interior = points[1:-1]
    if chord == 0.0:
        return sum(math.hypot(px - ax, py - ay) for px, py in interior) / len(interior)
    total = sum(abs(dx * (py - ay) - dy * (px - ax)) for px, py in interior)
    return total / (chord * len(interior))


def _arc_points(
    origin: tuple[float, float], heading: float, turn: float, hop_len: float
) -> list[tuple[float, float]]:
    points = [origin]
    x, y = origin
    for j in range(STROKE_HOPS):
        phi = heading + (j - (STROKE_HOPS - 1) / 2.0) * turn
        x += hop_len * math.cos(phi)
        y += hop_len * math.sin(phi)
        points.append((x, y))
    return points


def _solve_turn(hop_len: float, error_target: float) -> float:
    """Turn-per-hop whose arc deviates from its chord by exactly error_target."""
    hi = math.pi / STROKE_HOPS  # total turn capped at a half circle
    max_error = _mean_perpendicular(_arc_points(HOME, 0.0, hi, hop_len))
    if error_target >= max_error:
        return hi
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _mean_perpendicular(_arc_points(HOME, 0.0, mid, hop_len)) < error_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class _MouseWriter:
    """Emits constant-point-speed strokes; hop distance is always speed x dt."""

    def __init__(self, events: list[ev.InputEvent]):
        self.events = events
        self._turn_cache: dict[tuple[float, float], float] = {}
        self._stroke_index = 0

    def window_strokes(self, start_ms: int, end_ms: int, velocity: float, error: float) -> None:
        hop_len = velocity * (MOVE_HOP_MS / 1000.0)
        key = (hop_len, error)
        turn = self._turn_cache.get(key)
        if turn is None:
            turn = self._turn_cache[key] = _solve_turn(hop_len, error)
        stroke_ms = STROKE_HOPS * MOVE_HOP_MS
        pause_ms = STROKE_PERIOD_MS - stroke_ms
        position = HOME
        t = start_ms + 500
        first = True
        while t + stroke_ms < end_ms - 500:
            if not first:
                # bridge hop from the previous stroke end keeps the speed invariant
                bridge = velocity * (pause_ms / 1000.0)
                heading = self._heading(position)
                position = (
                    position[0] + bridge * math.cos(heading),
                    position[1] + bridge * math.sin(heading),
                )
            points = _arc_points(position, self._heading(position), turn, hop_len)
            for j, (x, y) in enumerate(points):
                self.events.append(ev.MouseMove(t + j * MOVE_HOP_MS, x, y))
            position = points[-1]
            t += STROKE_PERIOD_MS
            first = False
            self._stroke_index += 1

    def _heading(self, position: tuple[float, float]) -> float:
        dx, dy = HOME[0] - position[0], HOME[1] - position[1]
        if math.hypot(dx, dy) > _HOME_RADIUS:
            return math.atan2(dy, dx)
        return self._stroke_index * _GOLDEN_ANGLE


def _subject_rng(spec: SynthSpec, subject_index: int) -> random.Random:
    # string seeds hash deterministically across processes (int/tuple seeds
    # would go through randomized hash())
    return random.Random(f"{spec.seed}:{subject_index}")


def plan_session(spec: SynthSpec, subject_index: int) -> SessionPlan:
    """Prompt schedule, planted levels, and per-window behavior targets."""
    rng = _subject_rng(spec, subject_index)
    offset = rng.randint(-spec.baseline_offset_range, spec.baseline_offset_range)
    jitter_start = rng.uniform(-spec.trajectory_jitter, spec.trajectory_jitter)
    jitter_end = rng.uniform(-spec.trajectory_jitter, spec.trajectory_jitter)
    session_ms = spec.session_duration_s * 1000

    windows: list[PlannedWindow] = []
    t = 0
    while True:
        gap_ms = 60_000 * rng.randint(3, 8)  # whole minutes within the 3-8 min band
        if t + gap_ms > session_ms:
            break
        start, end = t, t + gap_ms
        t = end
        frac = end / session_ms
        level = spec.trajectory.level(frac) + jitter_start + (jitter_end - jitter_start) * frac
        level = min(9.0, max(1.0, level))
        raw = min(9, max(1, _round_half_up(level) + offset))
        minutes = gap_ms / 60_000.0
        delete_count = max(0, _round_half_up(spec.delete_rate.target(level) * minutes + rng.gauss(0.0, spec.delete_rate.noise_sd) * minutes))
        windows.append(
            PlannedWindow(
                start_ms=start,
                end_ms=end,
                level=level,
                raw_answer=raw,
                dwell_target=max(10.0, spec.key_down_time.target(level) + rng.gauss(0.0, spec.key_down_time.noise_sd)),
                velocity_target=max(20.0, spec.mouse_velocity.target(level) + rng.gauss(0.0, spec.mouse_velocity.noise_sd)),
                error_target=max(0.25, spec.mouse_avg_error.target(level) + rng.gauss(0.0, spec.mouse_avg_error.noise_sd)),
                delete_target=delete_count / minutes,
            )
        )
    return SessionPlan(subject_index=subject_index, baseline_offset=offset, windows=tuple(windows))


_LETTERS = "etaoinshrdlu"


def generate_session(spec: SynthSpec, subject_index: int) -> ev.SessionLog:
    log, _ = generate_session_with_plan(spec, subject_index)
    return log


def generate_session_with_plan(spec: SynthSpec, subject_index: int) -> tuple[ev.SessionLog, SessionPlan]:
    plan = plan_session(spec, subject_index)
    events: list[ev.InputEvent] = []
    mouse = _MouseWriter(events)

    for window in plan.windows:
        dwells = _DwellStream(window.dwell_target)
        start, end = window.start_ms, window.end_ms
        minutes = (end - start) // 60_000

        # one typing burst per minute
        for m in range(minutes):
            tau = start + 60_000 * m + 3_000
            for k in range(TYPING_KEYS_PER_MINUTE):
                key = _LETTERS[k % len(_LETTERS)]
                dwell = dwells.next()
                events.append(ev.KeyDown(tau, key))
                events.append(ev.KeyUp(tau + dwell, key))
                tau += dwell + TYPING_GAP_MS

        # deletes spread evenly across the whole window
        count = _round_half_up(window.delete_target * ((end - start) / 60_000.0))
        if count > 0:
            spacing = (end - start) / count
            for j in range(count):
                tau = start + int((j + 0.5) * spacing)
                dwell = dwells.next()
                events.append(ev.KeyDown(tau, "Backspace"))
                events.append(ev.KeyUp(tau + dwell, "Backspace"))

        mouse.window_strokes(start, end, window.velocity_target, window.error_target)

        events.append(ev.KssPromptShown(end))
        events.append(ev.KssAnswered(end, window.raw_answer))

    events.sort(key=lambda e: e.t)
    log = ev.SessionLog(
        session_id=f"synth-{spec.seed}-{subject_index:03d}",
        subject_id=f"subject-{subject_index:02d}",
        started_at="2026-01-01T00:00:00+00:00",
        events=tuple(events),
    )
    return log, plan


def generate_benchmark(spec: SynthSpec) -> list[LabeledSample]:
    """All subjects' sessions pushed through feature extraction."""
    samples: list[LabeledSample] = []
    for subject_index in range(spec.subjects):
        log = generate_session(spec, subject_index)
        samples.extend(extract_samples(log).samples)
    return samples


# CLI-facing spec documents
def spec_to_dict(spec: SynthSpec) -> dict:
    if isinstance(spec.trajectory, LinearTrajectory):
        trajectory = {
            "kind": "linear",
            "start_kss": spec.trajectory.start_kss,
            "end_kss": spec.trajectory.end_kss,
        }
    else:
        trajectory = {
            "kind": "piecewise",
            "breakpoints": [list(bp) for bp in spec.trajectory.breakpoints],
        }
    def effect(e: FeatureEffect) -> dict:
        return {"base": e.base, "slope": e.slope, "noise_sd": e.noise_sd}

    return {
        "subjects": spec.subjects,
        "session_duration_s": spec.session_duration_s,
        "trajectory": trajectory,
        "trajectory_jitter": spec.trajectory_jitter,
        "effects": {
            "mouse_avg_error": effect(spec.mouse_avg_error),
            "mouse_velocity": effect(spec.mouse_velocity),
            "delete_rate": effect(spec.delete_rate),
            "key_down_time": effect(spec.key_down_time),
        },
        "baseline_offset_range": spec.baseline_offset_range,
        "seed": spec.seed,
    }


def spec_from_dict(doc: dict) -> SynthSpec:
    defaults = SynthSpec()
    trajectory: Trajectory = defaults.trajectory
    traj_doc = doc.get("trajectory")
    if traj_doc:
        if traj_doc.get("kind") == "piecewise":
            trajectory = PiecewiseTrajectory(
                tuple((float(f), float(k)) for f, k in traj_doc["breakpoints"])
            )
        elif traj_doc.get("kind") == "linear":
            trajectory = LinearTrajectory(float(traj_doc["start_kss"]), float(traj_doc["end_kss"]))
        else:
            raise ValueError(f"unknown trajectory kind {traj_doc.get('kind')!r}")

    def effect(name: str, fallback: FeatureEffect) -> FeatureEffect:
        e = doc.get("effects", {}).get(name)
        if e is None:
            return fallback
        return FeatureEffect(
            base=float(e.get("base", fallback.base)),
            slope=float(e.get("slope", fallback.slope)),
            noise_sd=float(e.get("noise_sd", fallback.noise_sd)),
        )

    return SynthSpec(
        subjects=int(doc.get("subjects", defaults.subjects)),
        session_duration_s=int(doc.get("session_duration_s", defaults.session_duration_s)),
        trajectory=trajectory,
        trajectory_jitter=float(doc.get("trajectory_jitter", defaults.trajectory_jitter)),
        mouse_avg_error=effect("mouse_avg_error", defaults.mouse_avg_error),
        mouse_velocity=effect("mouse_velocity", defaults.mouse_velocity),
        delete_rate=effect("delete_rate", defaults.delete_rate),
        key_down_time=effect("key_down_time", defaults.key_down_time),
        baseline_offset_range=int(doc.get("baseline_offset_range", defaults.baseline_offset_range)),
        seed=int(doc.get("seed", defaults.seed)),
    )
