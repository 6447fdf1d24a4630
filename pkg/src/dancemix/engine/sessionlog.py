"""Append-only session log: one JSON object per line.

Line 1 is a header (config, library hash, weights hash); every following
line is a step event. Serialization is canonical (sorted keys, no spaces,
NaN rejected) so identical sessions produce byte-identical files. Offline
runs log simulated timestamps for the same reason.

Step event fields:
  step          1-based index, strictly increasing
  t_ms          decision time on the session clock
  energy        {"mean","std","min","max"} over the movement window
  energy_series [[t_ms, frame_energy], ...] per in-window frame transition,
                kept so analysis can re-segment energy at any granularity
  clip_id       selected clip
  similarity    cosine score of the selection
  top5          [[clip_id, score], ...] best five
  latency_ms    step wall-clock cost (0.0 offline)
  fault         null, or a message when the step degraded
  repeated      true when the fault fallback replayed the current clip
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from ..errors import InvalidArgumentError

LOG_VERSION = 1


def canonical_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def make_header(
    config_dict: dict, library_sha256: str, weights_sha256: str, n_clips: int, mode: str
) -> dict:
    return {
        "type": "header",
        "version": LOG_VERSION,
        "mode": mode,
        "config": config_dict,
        "library_sha256": library_sha256,
        "weights_sha256": weights_sha256,
        "n_clips": n_clips,
    }


@dataclass
class SessionLog:
    header: dict
    events: list[dict] = field(default_factory=list)

    def validate(self) -> None:
        if self.header.get("type") != "header":
            raise InvalidArgumentError("first log line is not a header")
        if self.header.get("version") != LOG_VERSION:
            raise InvalidArgumentError(
                f"unsupported log version {self.header.get('version')!r}"
            )
        prev = 0
        for event in self.events:
            if event.get("type") != "step":
                raise InvalidArgumentError(f"unexpected event type {event.get('type')!r}")
            step = event.get("step")
            if not isinstance(step, int) or step <= prev:
                raise InvalidArgumentError(
                    f"step indices must increase strictly; saw {step} after {prev}"
                )
            prev = step

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(self.header) + "\n")
            for event in self.events:
                fh.write(canonical_json(event) + "\n")


class SessionLogWriter:
    """Incremental writer: header first, then one flushed line per step."""

    def __init__(self, path: str | Path, header: dict):
        self._fh: IO[str] = open(path, "w", encoding="utf-8")
        self._fh.write(canonical_json(header) + "\n")
        self._fh.flush()

    def append(self, event: dict) -> None:
        self._fh.write(canonical_json(event) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self) -> "SessionLogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_session_log(path: str | Path) -> SessionLog:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise InvalidArgumentError(f"{path} is empty")
    try:
        parsed = [json.loads(line) for line in lines if line.strip()]
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path} is not valid JSON Lines: {exc}") from None
    log = SessionLog(header=parsed[0], events=parsed[1:])
    log.validate()
    return log
