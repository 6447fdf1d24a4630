"""Engine configuration: JSON file <-> dataclass, with env overrides."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ..errors import ConfigError

OUTPUT_MODES = ("render", "device")


@dataclass
class EngineConfig:
    clip_s: float = 3.5
    crossfade_ms: float = 500.0
    smoothing_tau_s: float = 7.0
    fps: float = 30.0
    seed: int = 0
    library: str = "library"
    weights: str = "weights.dmwb"
    output_mode: str = "render"
    anti_repeat_window: int = 0
    port: int = 8765

    def __post_init__(self) -> None:
        if self.clip_s <= 0:
            raise ConfigError("clip_s must be positive")
        if not 0 < self.crossfade_ms < self.clip_s * 1000.0:
            raise ConfigError("crossfade_ms must lie in (0, clip_s*1000)")
        if self.smoothing_tau_s < 0:
            raise ConfigError("smoothing_tau_s must be >= 0")
        if self.fps <= 0:
            raise ConfigError("fps must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in u64")
        if self.output_mode not in OUTPUT_MODES:
            raise ConfigError(f"output_mode must be one of {OUTPUT_MODES}")
        if self.anti_repeat_window < 0:
            raise ConfigError("anti_repeat_window must be >= 0")
        if not 0 < self.port < 65536:
            raise ConfigError("port out of range")

    @property
    def cadence_s(self) -> float:
        """Seconds between clip starts: each clip overlaps the next by the crossfade."""
        return self.clip_s - self.crossfade_ms / 1000.0

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, obj: dict) -> "EngineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path: str | Path | None, env: dict[str, str] | None = None) -> EngineConfig:
    """Read a JSON config file (or defaults) and apply ENGINE_* env overrides."""
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            obj = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p} is not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise ConfigError(f"{p} must hold a JSON object")
        cfg = EngineConfig.from_json_dict(obj)
    else:
        cfg = EngineConfig()
    return apply_env(cfg, env if env is not None else dict(os.environ))


def apply_env(cfg: EngineConfig, env: dict[str, str]) -> EngineConfig:
    updates: dict = {}
    if env.get("ENGINE_LIBRARY"):
        updates["library"] = env["ENGINE_LIBRARY"]
    if env.get("ENGINE_WEIGHTS"):
        updates["weights"] = env["ENGINE_WEIGHTS"]
    if env.get("ENGINE_PORT"):
        try:
            updates["port"] = int(env["ENGINE_PORT"])
        except ValueError:
            raise ConfigError(f"ENGINE_PORT is not an integer: {env['ENGINE_PORT']!r}") from None
    if not updates:
        return cfg
    merged = cfg.to_json_dict()
    merged.update(updates)
    return EngineConfig.from_json_dict(merged)


def save_config(path: str | Path, cfg: EngineConfig) -> None:
    Path(path).write_text(
        json.dumps(cfg.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
