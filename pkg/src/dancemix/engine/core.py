"""The decision loop: movement window in, scheduled clip out.

Each step runs rasterize -> movement encoder (mu) -> generator(z_move,
prev_audio_latent) -> EMA smoothing -> cosine retrieval. The previous-audio
conditioning always uses the stored latent of the clip that was actually
scheduled, bootstrapped from zeros before step 1. Smoothing operates on the
predicted latent with alpha = 1 - exp(-clip_s / tau), which makes tau the
time constant of the musical trajectory regardless of cadence settings.

A step that raises mid-pipeline degrades instead of failing the session: the
current clip repeats and the fault lands in the log. Output never gaps.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dsp import ENGINE_SAMPLE_RATE, save_wav
from ..errors import EngineError, InsufficientDataError
from ..library import ClipLibrary, load_library
from ..neural import (
    LATENT_DIM,
    WeightBundle,
    bundle_sha256,
    encode,
    generator_forward,
    load_weight_bundle,
)
from ..pose import MovementWindow, collect_windows, energy_stats, read_replay, window_energy_series
from ..raster import image_to_float, rasterize
from ..retrieval import RetrievalPolicy, retrieve, top_k
from .config import EngineConfig
from .mixer import render_schedule
from .sessionlog import SessionLog, SessionLogWriter, make_header

log = logging.getLogger(__name__)


def ema_alpha(clip_s: float, smoothing_tau_s: float) -> float:
    """Per-step EMA weight. tau = 0 disables smoothing (alpha = 1)."""
    if smoothing_tau_s <= 0:
        return 1.0
    return 1.0 - float(np.exp(-clip_s / smoothing_tau_s))


def ema_smooth(prev: np.ndarray, new: np.ndarray, alpha: float) -> np.ndarray:
    if not 0.0 <= alpha <= 1.0:
        raise EngineError(f"alpha {alpha} outside [0, 1]")
    prev = np.asarray(prev, dtype=np.float32)
    new = np.asarray(new, dtype=np.float32)
    mixed = prev.astype(np.float64) * (1.0 - alpha) + new.astype(np.float64) * alpha
    return mixed.astype(np.float32)


@dataclass
class EngineState:
    prev_audio_latent: np.ndarray = field(
        default_factory=lambda: np.zeros(LATENT_DIM, dtype=np.float32)
    )
    smoothed_pred: np.ndarray = field(
        default_factory=lambda: np.zeros(LATENT_DIM, dtype=np.float32)
    )
    current_clip_id: str | None = None
    step_index: int = 0
    recent_ids: list[str] = field(default_factory=list)


class Engine:
    """Library + weights + config, plus the mutable per-session state."""

    def __init__(self, config: EngineConfig, library: ClipLibrary, weights: WeightBundle):
        self.config = config
        self.library = library
        self.weights = weights
        self.policy = RetrievalPolicy(anti_repeat_window=config.anti_repeat_window)
        self.alpha = ema_alpha(config.clip_s, config.smoothing_tau_s)
        self.state = EngineState()

    @classmethod
    def from_config(cls, config: EngineConfig) -> "Engine":
        weights = load_weight_bundle(config.weights)
        library = load_library(config.library, weights=weights, verify_files=False)
        return cls(config, library, weights)

    def reset(self) -> None:
        self.state = EngineState()

    def _select(self, window: MovementWindow) -> tuple[str, float, list[list], np.ndarray]:
        """Full pipeline without touching state; returns (id, score, top5, smoothed)."""
        image = rasterize(window)
        mu, _ = encode(image_to_float(image), self.weights, "movement_encoder")
        z_pred = generator_forward(mu, self.state.prev_audio_latent, self.weights)
        smoothed = ema_smooth(self.state.smoothed_pred, z_pred, self.alpha)
        entry, score = retrieve(smoothed, self.library, self.policy, self.state.recent_ids)
        best = top_k(smoothed, self.library, min(5, len(self.library)))
        return entry.id, score, [[e.id, round(s, 9)] for e, s in best], smoothed

    def step(
        self,
        window: MovementWindow,
        t_ms: float,
        measure_latency: bool = False,
        deadline_ms: float | None = None,
    ) -> dict:
        """Run one decision; returns the log event.

        A pipeline fault, or a live step finishing past deadline_ms, degrades
        to repeating the current clip with the cause logged. Selection state
        is committed only on clean steps, so a degraded step leaves the
        musical trajectory where it was.
        """
        t0 = time.perf_counter()
        times_ms, energies = window_energy_series(window)
        stats = energy_stats(energies)
        fault: str | None = None
        repeated = False
        try:
            clip_id, score, best, smoothed = self._select(window)
            latency = (time.perf_counter() - t0) * 1000.0
            if deadline_ms is not None and latency > deadline_ms and self.state.current_clip_id:
                fault = f"deadline overrun: {latency:.1f} ms > {deadline_ms:.1f} ms"
            else:
                self.state.smoothed_pred = smoothed
                self.state.prev_audio_latent = self.library.latent(clip_id).copy()
        except Exception as exc:
            latency = (time.perf_counter() - t0) * 1000.0
            if self.state.current_clip_id is None:
                raise EngineError(f"step 1 failed with no clip to repeat: {exc}") from exc
            fault = f"{type(exc).__name__}: {exc}"
        if fault is not None:
            repeated = True
            clip_id = self.state.current_clip_id
            score = 0.0
            best = []
            log.warning("step %d degraded, repeating %s: %s", self.state.step_index + 1, clip_id, fault)
        self.state.current_clip_id = clip_id
        self.state.step_index += 1
        self.state.recent_ids.append(clip_id)
        return {
            "type": "step",
            "step": self.state.step_index,
            "t_ms": float(t_ms),
            "energy": stats.as_dict(),
            "energy_series": [[int(t), round(float(e), 9)] for t, e in zip(times_ms, energies)],
            "clip_id": clip_id,
            "similarity": round(float(score), 9),
            "top5": best,
            "crossfade_ms": self.config.crossfade_ms,
            "latency_ms": round(latency, 3) if measure_latency else 0.0,
            "fault": fault,
            "repeated": repeated,
        }

    def header(self, mode: str) -> dict:
        return make_header(
            config_dict=self.config.to_json_dict(),
            library_sha256=self.library.content_hash(),
            weights_sha256=bundle_sha256(self.weights),
            n_clips=len(self.library),
            mode=mode,
        )


def run_offline(
    config: EngineConfig,
    pose_path: str | Path,
    out_dir: str | Path,
    engine: Engine | None = None,
) -> tuple[Path, Path]:
    """Deterministic simulation: replay file in, session log + rendered WAV out.

    The session clock is simulated (step n decides at n * cadence ms) and
    latency_ms is logged as 0, so two runs with the same inputs produce
    byte-identical logs and renders.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if engine is None:
        engine = Engine.from_config(config)
    engine.reset()

    frames = read_replay(pose_path)
    if not frames:
        raise InsufficientDataError(f"replay {pose_path} holds no frames")
    # raises InsufficientDataError before any audio when the replay is too short
    windows = collect_windows(
        frames, duration_s=config.clip_s, hop_s=config.cadence_s, fps=config.fps
    )

    log_path = out_dir / "session.log"
    cadence_ms = config.cadence_s * 1000.0
    events = []
    with SessionLogWriter(log_path, engine.header("offline")) as writer:
        for k, window in enumerate(windows):
            event = engine.step(window, t_ms=k * cadence_ms, measure_latency=False)
            writer.append(event)
            events.append(event)

    clips = [engine.library.load_audio(event["clip_id"]) for event in events]
    rendered = render_schedule(clips, config.crossfade_ms, ENGINE_SAMPLE_RATE)
    wav_path = out_dir / "render.wav"
    save_wav(wav_path, rendered)
    log.info("offline run: %d steps, %.1f s of audio", len(events), rendered.duration_s)
    return log_path, wav_path


def replay_session(log_path: str | Path, library: ClipLibrary) -> SessionLog:
    """Load a session log and verify every scheduled clip is in the library."""
    from .sessionlog import read_session_log

    session = read_session_log(log_path)
    known = set(library.ids())
    for event in session.events:
        if event["clip_id"] not in known:
            raise EngineError(f"log references unknown clip {event['clip_id']!r}")
    return session
