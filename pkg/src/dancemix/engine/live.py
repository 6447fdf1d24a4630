"""Live session runner: wall-clock cadence, frame buffer, telemetry fan-out.

Three tasks connected only by queues, per the concurrency contract:
pose ingestion (push_frame, called by the transport), the decision loop
(one step per cadence tick over the latest complete window), and audio
output (consumes the schedule queue). The decision loop enforces the
deadline clip_s*1000 - crossfade_ms; a late or failing step repeats the
current clip so audio never gaps.

Playback goes to a device when output_mode is "device" and the optional
sounddevice package is importable; otherwise the schedule is rendered to
a WAV on stop, which is also the reference output offline runs produce.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from pathlib import Path
from typing import Callable

import numpy as np

from ..dsp import ENGINE_SAMPLE_RATE, AudioClip, save_wav
from ..errors import EngineError, InsufficientDataError
from ..library import ClipLibrary
from ..neural import WeightBundle
from ..pose import PoseFrame, window_ending_at
from .config import EngineConfig
from .core import Engine
from .mixer import mix_output
from .sessionlog import SessionLogWriter

log = logging.getLogger(__name__)


class LiveEngine:
    def __init__(
        self,
        config: EngineConfig,
        library: ClipLibrary | None = None,
        weights: WeightBundle | None = None,
        out_dir: str | Path = ".",
    ):
        if library is not None and weights is not None:
            self.engine = Engine(config, library, weights)
        else:
            self.engine = Engine.from_config(config)
        self.config = config
        self.out_dir = Path(out_dir)

        self._frames: list[PoseFrame] = []
        self._frames_lock = threading.Lock()
        self._schedule_q: queue.Queue[str | None] = queue.Queue()
        self._subscribers: list[Callable[[dict], None]] = []
        self._sub_lock = threading.Lock()
        self._scheduled: list[tuple[str, float]] = []  # (clip_id, crossfade_ms when scheduled)
        self._stop = threading.Event()
        self._decision_thread: threading.Thread | None = None
        self._audio_thread: threading.Thread | None = None
        self._writer: SessionLogWriter | None = None
        self._session_t0 = 0.0
        self.latest_event: dict | None = None
        self.log_path = self.out_dir / "session.log"
        self.wav_path = self.out_dir / "render.wav"
        self._player = None

    # --- pose ingestion (producer side) ---------------------------------

    def push_frame(self, frame: PoseFrame) -> None:
        horizon_ms = self.config.clip_s * 2000.0
        with self._frames_lock:
            if self._frames and frame.timestamp_ms <= self._frames[-1].timestamp_ms:
                return  # stale or duplicate; live input is best-effort
            self._frames.append(frame)
            cutoff = frame.timestamp_ms - horizon_ms
            while self._frames and self._frames[0].timestamp_ms < cutoff:
                self._frames.pop(0)

    def subscribe(self, callback: Callable[[dict], None]) -> None:
        with self._sub_lock:
            self._subscribers.append(callback)

    def unsubscribe(self, callback: Callable[[dict], None]) -> None:
        with self._sub_lock:
            if callback in self._subscribers:
                self._subscribers.remove(callback)

    def _publish(self, event: dict) -> None:
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for callback in subscribers:
            try:
                callback(event)
            except Exception:
                log.exception("telemetry subscriber failed; continuing")

    # --- lifecycle --------------------------------------------------------

    def start(self) -> None:
        if self._decision_thread is not None:
            raise EngineError("session already running")
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.engine.reset()
        self._writer = SessionLogWriter(self.log_path, self.engine.header("live"))
        self._session_t0 = time.monotonic()
        self._stop.clear()
        if self.config.output_mode == "device":
            self._player = _open_device_player()
        self._audio_thread = threading.Thread(target=self._audio_loop, daemon=True)
        self._audio_thread.start()
        self._decision_thread = threading.Thread(target=self._decision_loop, daemon=True)
        self._decision_thread.start()
        log.info("live session started (cadence %.2f s)", self.config.cadence_s)

    def stop(self) -> tuple[Path, Path | None]:
        self._stop.set()
        if self._decision_thread is not None:
            self._decision_thread.join(timeout=10.0)
            self._decision_thread = None
        self._schedule_q.put(None)
        if self._audio_thread is not None:
            self._audio_thread.join(timeout=10.0)
            self._audio_thread = None
        if self._writer is not None:
            self._writer.close()
            self._writer = None
        wav_path: Path | None = None
        if self._scheduled:
            # each transition fades with the crossfade in effect when its
            # incoming clip was scheduled
            mixed = self.engine.library.load_audio(self._scheduled[0][0]).samples
            for clip_id, fade_ms in self._scheduled[1:]:
                nxt = self.engine.library.load_audio(clip_id)
                mixed = mix_output(mixed, nxt.samples, fade_ms, ENGINE_SAMPLE_RATE)
            save_wav(self.wav_path, AudioClip(np.clip(mixed, -1.0, 1.0), ENGINE_SAMPLE_RATE))
            wav_path = self.wav_path
        log.info("live session stopped after %d steps", len(self._scheduled))
        return self.log_path, wav_path

    @property
    def running(self) -> bool:
        return self._decision_thread is not None

    # --- decision loop ------------------------------------------------------

    def _decision_loop(self) -> None:
        next_tick = time.monotonic() + self.config.cadence_s
        while not self._stop.wait(max(0.0, next_tick - time.monotonic())):
            # cadence and deadline come from config each tick so a mid-session
            # config update takes effect on the next transition
            next_tick += self.config.cadence_s
            deadline_ms = self.config.clip_s * 1000.0 - self.config.crossfade_ms
            with self._frames_lock:
                buffered = list(self._frames)
            t_ms = (time.monotonic() - self._session_t0) * 1000.0
            try:
                window = window_ending_at(
                    buffered,
                    buffered[-1].timestamp_ms if buffered else 0.0,
                    self.config.clip_s,
                    self.config.fps,
                )
            except InsufficientDataError:
                # nothing to dance to yet; audio starts with the first full window
                continue
            try:
                event = self.engine.step(
                    window, t_ms=t_ms, measure_latency=True, deadline_ms=deadline_ms
                )
            except EngineError:
                log.exception("first live step failed; waiting for usable input")
                continue
            if self._writer is not None:
                self._writer.append(event)
            self.latest_event = event
            self._scheduled.append((event["clip_id"], float(event["crossfade_ms"])))
            self._schedule_q.put(event["clip_id"])
            self._publish(event)

    # --- audio output --------------------------------------------------------

    def _audio_loop(self) -> None:
        while True:
            clip_id = self._schedule_q.get()
            if clip_id is None:
                return
            if self._player is None:
                continue  # render mode: stop() mixes the accumulated schedule
            try:
                clip = self.engine.library.load_audio(clip_id)
                self._player.play(clip)
            except Exception:
                log.exception("device playback failed for %s", clip_id)


class _DevicePlayer:
    def __init__(self, sd_module):
        self._sd = sd_module

    def play(self, clip) -> None:
        self._sd.play(clip.samples.astype("float32"), clip.sample_rate)


def _open_device_player():
    try:
        import sounddevice  # type: ignore[import-not-found]
    except ImportError:
        log.warning("sounddevice not installed; falling back to WAV render on stop")
        return None
    return _DevicePlayer(sounddevice)
