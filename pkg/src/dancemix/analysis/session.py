"""Session resegmentation: log + rendered audio -> paired 10 s feature rows.

Each row pairs the movement-energy summary of a 10 s span with the 47
audio features of the same span of rendered output. Movement energy comes
from the per-frame energy series the log carries, rebased onto the render
timeline (the first decision window starts the session clock). Rows with
non-finite entries or an empty energy span are dropped, with the count
reported rather than hidden.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dsp import AudioClip, load_wav
from ..errors import InsufficientDataError, InvalidArgumentError
from ..features import FEATURE_NAMES, extract_features
from ..pose import energy_stats
from .sessionstats import run_battery

SEGMENT_SECONDS = 10.0
MIN_SESSION_SECONDS = 60.0
ENERGY_COLUMNS = ("mean_energy", "min_energy", "max_energy", "std_energy")

log = logging.getLogger(__name__)


@dataclass
class SessionDataset:
    energy: np.ndarray  # (n_segments, 4), ENERGY_COLUMNS order
    audio: np.ndarray  # (n_segments, 47), FEATURE_NAMES order
    segment_s: float
    dropped_rows: int
    energy_columns: tuple[str, ...] = ENERGY_COLUMNS
    audio_columns: tuple[str, ...] = field(default_factory=lambda: FEATURE_NAMES)

    def __post_init__(self) -> None:
        if self.energy.shape[0] != self.audio.shape[0]:
            raise InvalidArgumentError("energy and audio row counts differ")
        if not (np.all(np.isfinite(self.energy)) and np.all(np.isfinite(self.audio))):
            raise InvalidArgumentError("dataset rows must be finite")

    @property
    def n_segments(self) -> int:
        return self.energy.shape[0]


def _pooled_energy(events: list[dict], fps: float) -> tuple[np.ndarray, np.ndarray]:
    """All logged frame energies on the render timeline, deduplicated.

    Consecutive decision windows overlap by the crossfade, so the same pose
    frames appear in adjacent events; keeping one sample per timestamp
    avoids double-weighting the overlap.
    """
    seen: dict[int, float] = {}
    for event in events:
        for t_ms, e in event.get("energy_series", []):
            seen.setdefault(int(t_ms), float(e))
    if not seen:
        raise InsufficientDataError("log events carry no energy series")
    times = np.array(sorted(seen), dtype=np.float64)
    energies = np.array([seen[int(t)] for t in times])
    # rebase pose-clock timestamps so the first decision window starts at 0
    t_base = times[0] - 1000.0 / fps
    return times - t_base, energies


def build_dataset(
    session_log, audio: AudioClip, segment_s: float = SEGMENT_SECONDS
) -> SessionDataset:
    events = [e for e in session_log.events if e.get("type") == "step"]
    if not events:
        raise InsufficientDataError("session log has no step events")
    fps = float(session_log.header.get("config", {}).get("fps", 30.0))
    times_ms, energies = _pooled_energy(events, fps)

    duration_s = min(audio.duration_s, times_ms[-1] / 1000.0)
    if duration_s < MIN_SESSION_SECONDS:
        raise InsufficientDataError(
            f"session spans {duration_s:.1f} s; analysis needs >= {MIN_SESSION_SECONDS:.0f} s"
        )
    n_segments = int(duration_s // segment_s)
    if n_segments < 2:
        raise InsufficientDataError("fewer than two full segments")

    energy_rows, audio_rows, dropped = [], [], 0
    seg_samples = int(round(segment_s * audio.sample_rate))
    for i in range(n_segments):
        lo_ms, hi_ms = i * segment_s * 1000.0, (i + 1) * segment_s * 1000.0
        mask = (times_ms >= lo_ms) & (times_ms < hi_ms)
        segment = AudioClip(
            audio.samples[i * seg_samples : (i + 1) * seg_samples], audio.sample_rate
        )
        if not np.any(mask):
            dropped += 1
            continue
        stats = energy_stats(energies[mask])
        feats = extract_features(segment)
        e_row = [getattr(stats, c) for c in ENERGY_COLUMNS]
        a_row = feats.values
        if not (np.all(np.isfinite(e_row)) and np.all(np.isfinite(a_row))):
            dropped += 1
            continue
        energy_rows.append(e_row)
        audio_rows.append(a_row)
    if len(energy_rows) < 2:
        raise InsufficientDataError("too few usable segments after dropping bad rows")
    if dropped:
        log.warning("dropped %d of %d segments with missing or non-finite data", dropped, n_segments)
    return SessionDataset(
        energy=np.asarray(energy_rows, dtype=np.float64),
        audio=np.asarray(audio_rows, dtype=np.float64),
        segment_s=segment_s,
        dropped_rows=dropped,
    )


def analyze_session(
    session_log,
    audio: AudioClip | str | Path,
    segment_s: float = SEGMENT_SECONDS,
    rf_trees: int = 200,
    seed: int = 0,
):
    """Full statistical battery over a finished session; returns AnalysisReport."""
    if isinstance(audio, (str, Path)):
        audio = load_wav(audio)
    dataset = build_dataset(session_log, audio, segment_s)
    return run_battery(dataset, rf_trees=rf_trees, seed=seed)
