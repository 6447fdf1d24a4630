"""Landmark stream ingestion: normalization, windowing, and movement energy.

A pose source (live estimator or replay file) delivers frames of five tracked
landmarks. This module turns that stream into fixed-duration movement windows
resampled onto a uniform frame grid, and quantifies how much the body moved.

Replay files are JSON Lines, one object per frame:

    {"t": <int ms>, "pts": [[x, y], ... 5 pairs], "conf": [c1 .. c5]}

with landmarks in the order Head, LeftWrist, RightWrist, LeftAnkle, RightAnkle
and coordinates normalized to [-1, 1]. The live pose WebSocket uses the same
schema per message.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError

N_LANDMARKS = 5

# Gaps shorter than this are bridged by linear interpolation; longer gaps
# hold the last seen value so a dropped tracker cannot smear across seconds.
MAX_INTERP_GAP_MS = 200.0

# Points below this confidence are replaced by the previous frame's point.
MIN_CONFIDENCE = 0.3

DEFAULT_WINDOW_S = 3.5
DEFAULT_FPS = 30.0


class LandmarkId(IntEnum):
    """The five tracked landmarks, in drawing/serialization order."""

    HEAD = 0
    LEFT_WRIST = 1
    RIGHT_WRIST = 2
    LEFT_ANKLE = 3
    RIGHT_ANKLE = 4


@dataclass
class PoseFrame:
    """One timestamped observation of all five landmarks.

    points is a (5, 2) array of [-1, 1] coordinates, confidence a (5,) array
    in [0, 1].
    """

    timestamp_ms: int
    points: np.ndarray
    confidence: np.ndarray = field(default_factory=lambda: np.ones(N_LANDMARKS))

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)
        self.confidence = np.asarray(self.confidence, dtype=np.float64)
        if self.points.shape != (N_LANDMARKS, 2):
            raise InvalidArgumentError(
                f"expected {N_LANDMARKS}x2 points, got {self.points.shape}"
            )
        if self.confidence.shape != (N_LANDMARKS,):
            raise InvalidArgumentError(
                f"expected {N_LANDMARKS} confidence values, got {self.confidence.shape}"
            )
        self.points = np.clip(self.points, -1.0, 1.0)


@dataclass
class MovementWindow:
    """A fixed-duration run of pose frames on a uniform grid."""

    frames: list[PoseFrame]
    nominal_duration_s: float = DEFAULT_WINDOW_S
    nominal_fps: float = DEFAULT_FPS

    def __post_init__(self) -> None:
        if len(self.frames) < 2:
            raise InvalidArgumentError("a movement window needs at least 2 frames")
        span_ms = self.frames[-1].timestamp_ms - self.frames[0].timestamp_ms
        nominal_ms = self.nominal_duration_s * 1000.0
        if abs(span_ms - nominal_ms) > 0.1 * nominal_ms:
            raise InvalidArgumentError(
                f"window spans {span_ms} ms, outside +-10% of {nominal_ms:.0f} ms"
            )

    @property
    def start_ms(self) -> int:
        return self.frames[0].timestamp_ms

    @property
    def end_ms(self) -> int:
        return self.frames[-1].timestamp_ms

    def points_array(self) -> np.ndarray:
        """Frames stacked as an (n_frames, 5, 2) array."""
        return np.stack([f.points for f in self.frames])


@dataclass(frozen=True)
class EnergyStats:
    """Summary statistics of a per-frame movement energy series."""

    mean_energy: float
    min_energy: float
    max_energy: float
    std_energy: float

    def as_dict(self) -> dict[str, float]:
        return {
            "mean": self.mean_energy,
            "min": self.min_energy,
            "max": self.max_energy,
            "std": self.std_energy,
        }


def normalize_point(px: float, py: float, frame_w: float, frame_h: float) -> tuple[float, float]:
    """Map pixel coordinates to [-1, 1] relative to the camera frame."""
    if frame_w <= 0 or frame_h <= 0:
        raise InvalidArgumentError("frame dimensions must be positive")
    x = 2.0 * px / frame_w - 1.0
    y = 2.0 * py / frame_h - 1.0
    return (min(1.0, max(-1.0, x)), min(1.0, max(-1.0, y)))


def denormalize_point(x: float, y: float, frame_w: float, frame_h: float) -> tuple[float, float]:
    """Inverse of normalize_point for in-bounds coordinates."""
    if frame_w <= 0 or frame_h <= 0:
        raise InvalidArgumentError("frame dimensions must be positive")
    return ((x + 1.0) * frame_w / 2.0, (y + 1.0) * frame_h / 2.0)


def stabilize_stream(frames: Sequence[PoseFrame], min_confidence: float = MIN_CONFIDENCE) -> list[PoseFrame]:
    """Replace low-confidence points with the previous frame's point.

    The first frame is kept as-is; there is nothing earlier to fall back on.
    """
    out: list[PoseFrame] = []
    prev_points: np.ndarray | None = None
    for frame in frames:
        pts = frame.points.copy()
        if prev_points is not None:
            bad = frame.confidence < min_confidence
            pts[bad] = prev_points[bad]
        out.append(PoseFrame(frame.timestamp_ms, pts, frame.confidence.copy()))
        prev_points = pts
    return out


def _sample_at(times_ms: np.ndarray, points: np.ndarray, conf: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Value of the stream at time t: linear inside short gaps, hold in long ones."""
    idx = int(np.searchsorted(times_ms, t, side="right")) - 1
    idx = max(0, min(idx, len(times_ms) - 1))
    t_prev = times_ms[idx]
    if t <= t_prev or idx == len(times_ms) - 1:
        return points[idx], conf[idx]
    t_next = times_ms[idx + 1]
    if t_next - t_prev < MAX_INTERP_GAP_MS:
        w = (t - t_prev) / (t_next - t_prev)
        return (
            (1.0 - w) * points[idx] + w * points[idx + 1],
            (1.0 - w) * conf[idx] + w * conf[idx + 1],
        )
    return points[idx], conf[idx]


def collect_windows(
    stream: Sequence[PoseFrame],
    duration_s: float = DEFAULT_WINDOW_S,
    hop_s: float = DEFAULT_WINDOW_S,
    fps: float = DEFAULT_FPS,
) -> list[MovementWindow]:
    """Segment a stream into duration_s windows advancing by hop_s.

    Each window is resampled onto a uniform fps grid so every window has
    exactly round(fps * duration_s) frames regardless of source jitter;
    rasterization and energy statistics stay deterministic that way.

    Raises InsufficientDataError when the stream does not span one full
    window.
    """
    if duration_s <= 0 or hop_s <= 0 or fps <= 0:
        raise InvalidArgumentError("duration, hop, and fps must be positive")
    if len(stream) >= 2:
        ts = [f.timestamp_ms for f in stream]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidArgumentError("stream timestamps must be strictly increasing")
    duration_ms = duration_s * 1000.0
    hop_ms = hop_s * 1000.0
    if len(stream) < 2 or (stream[-1].timestamp_ms - stream[0].timestamp_ms) < duration_ms:
        raise InsufficientDataError(
            f"stream spans less than one {duration_s} s window"
        )

    times = np.array([f.timestamp_ms for f in stream], dtype=np.float64)
    points = np.stack([f.points for f in stream])
    conf = np.stack([f.confidence for f in stream])

    windows: list[MovementWindow] = []
    t0 = times[0]
    k = 0
    while t0 + k * hop_ms + duration_ms <= times[-1] + 0.5:
        windows.append(
            _resample_window(times, points, conf, t0 + k * hop_ms, duration_s, fps)
        )
        k += 1
    return windows


def _resample_window(
    times: np.ndarray,
    points: np.ndarray,
    conf: np.ndarray,
    start_ms: float,
    duration_s: float,
    fps: float,
) -> MovementWindow:
    n_frames = int(round(fps * duration_s))
    step_ms = 1000.0 / fps
    frames = []
    last_ts = None
    for i in range(n_frames):
        t = start_ms + i * step_ms
        pts, c = _sample_at(times, points, conf, t)
        ts_int = int(math.floor(t + 0.5))
        if last_ts is not None and ts_int <= last_ts:
            ts_int = last_ts + 1
        frames.append(PoseFrame(ts_int, pts, c))
        last_ts = ts_int
    return MovementWindow(frames, nominal_duration_s=duration_s, nominal_fps=fps)


def window_ending_at(
    stream: Sequence[PoseFrame],
    t_end_ms: float,
    duration_s: float = DEFAULT_WINDOW_S,
    fps: float = DEFAULT_FPS,
) -> MovementWindow:
    """The uniform-grid window covering the duration_s ending at t_end_ms.

    Live mode calls this once per cadence tick on its recent-frame buffer.
    """
    duration_ms = duration_s * 1000.0
    if len(stream) < 2 or (stream[-1].timestamp_ms - stream[0].timestamp_ms) < duration_ms:
        raise InsufficientDataError(
            f"buffer spans less than one {duration_s} s window"
        )
    times = np.array([f.timestamp_ms for f in stream], dtype=np.float64)
    points = np.stack([f.points for f in stream])
    conf = np.stack([f.confidence for f in stream])
    start = t_end_ms - duration_ms
    if start < times[0] - 1000.0 / fps:
        raise InsufficientDataError("window start precedes the buffered stream")
    return _resample_window(times, points, conf, start, duration_s, fps)


def frame_energy(prev: PoseFrame, cur: PoseFrame) -> float:
    """Mean Euclidean displacement of the five landmarks between two frames."""
    d = cur.points - prev.points
    return float(np.mean(np.sqrt(np.sum(d * d, axis=1))))


def window_energy_series(window: MovementWindow) -> tuple[np.ndarray, np.ndarray]:
    """Per-step energies of a window and the timestamps they land on.

    Returns (times_ms, energies); energy i is the displacement arriving at
    frame i+1, stamped with that frame's time.
    """
    pts = window.points_array()
    d = pts[1:] - pts[:-1]
    energies = np.mean(np.sqrt(np.sum(d * d, axis=2)), axis=1)
    times = np.array([f.timestamp_ms for f in window.frames[1:]], dtype=np.int64)
    return times, energies


def energy_stats(energies: Sequence[float] | np.ndarray) -> EnergyStats:
    """Mean/min/max and population (divisor n) standard deviation."""
    arr = np.asarray(energies, dtype=np.float64)
    if arr.size == 0:
        raise InsufficientDataError("cannot summarize an empty energy series")
    lo = float(np.min(arr))
    hi = float(np.max(arr))
    # sum/n can round one ulp past an extreme (e.g. a constant series whose
    # triple is inexact); clamp so min <= mean <= max holds exactly.
    mean = min(max(float(np.mean(arr)), lo), hi)
    return EnergyStats(
        mean_energy=mean,
        min_energy=lo,
        max_energy=hi,
        std_energy=float(np.std(arr)),
    )


# --- replay files -------------------------------------------------------------

def frame_to_json(frame: PoseFrame) -> dict:
    return {
        "t": int(frame.timestamp_ms),
        "pts": [[float(x), float(y)] for x, y in frame.points],
        "conf": [float(c) for c in frame.confidence],
    }


def frame_from_json(obj: dict) -> PoseFrame:
    """Parse one replay/WebSocket frame object, validating the schema."""
    if not isinstance(obj, dict):
        raise InvalidArgumentError("pose frame must be a JSON object")
    try:
        t = int(obj["t"])
        pts = obj["pts"]
        conf = obj.get("conf", [1.0] * N_LANDMARKS)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidArgumentError(f"malformed pose frame: {e}") from e
    if not isinstance(pts, list) or len(pts) != N_LANDMARKS:
        raise InvalidArgumentError(f"pose frame needs {N_LANDMARKS} point pairs")
    if any(not isinstance(p, (list, tuple)) or len(p) != 2 for p in pts):
        raise InvalidArgumentError("each point must be an [x, y] pair")
    if not isinstance(conf, list) or len(conf) != N_LANDMARKS:
        raise InvalidArgumentError(f"pose frame needs {N_LANDMARKS} confidence values")
    return PoseFrame(t, np.array(pts, dtype=np.float64), np.array(conf, dtype=np.float64))


def read_replay(path: str | Path) -> list[PoseFrame]:
    """Load a JSONL replay file; timestamps must be strictly increasing."""
    frames: list[PoseFrame] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise InvalidArgumentError(f"{path}:{lineno}: invalid JSON: {e}") from e
            frame = frame_from_json(obj)
            if frames and frame.timestamp_ms <= frames[-1].timestamp_ms:
                raise InvalidArgumentError(
                    f"{path}:{lineno}: timestamps must be strictly increasing"
                )
            frames.append(frame)
    if not frames:
        raise InsufficientDataError(f"{path}: replay file contains no frames")
    return frames


def write_replay(path: str | Path, frames: Iterable[PoseFrame]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(frame_to_json(frame), separators=(",", ":")) + "\n")


def iter_replay_paced(frames: Sequence[PoseFrame]) -> Iterator[tuple[float, PoseFrame]]:
    """Yield (relative_time_s, frame) pairs for replaying at recorded pace."""
    if not frames:
        return
    t0 = frames[0].timestamp_ms
    for frame in frames:
        yield ((frame.timestamp_ms - t0) / 1000.0, frame)
