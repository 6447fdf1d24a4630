"""Real-time decision loop, crossfade playback, and session logging."""

from .config import EngineConfig, apply_env, load_config, save_config
from .core import Engine, EngineState, ema_alpha, ema_smooth, replay_session, run_offline
from .live import LiveEngine
from .mixer import crossfade_gains, mix_output, render_schedule
from .sessionlog import (
    SessionLog,
    SessionLogWriter,
    canonical_json,
    make_header,
    read_session_log,
)

__all__ = [
    "Engine",
    "EngineConfig",
    "EngineState",
    "LiveEngine",
    "SessionLog",
    "SessionLogWriter",
    "apply_env",
    "canonical_json",
    "crossfade_gains",
    "ema_alpha",
    "ema_smooth",
    "load_config",
    "make_header",
    "mix_output",
    "read_session_log",
    "render_schedule",
    "replay_session",
    "run_offline",
    "save_config",
]
