"""Equal-power crossfades and schedule rendering.

Gains satisfy g_out(t)^2 + g_in(t)^2 = 1 for every t, so perceived power is
flat across a transition. Within an overlap of L samples the fade parameter
runs t = j/(L-1): the first overlap sample is pure outgoing clip and the
last is pure incoming clip, which keeps both clip boundaries continuous.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..dsp import ENGINE_SAMPLE_RATE, AudioClip
from ..errors import InvalidArgumentError

log = logging.getLogger(__name__)


def crossfade_gains(t: float) -> tuple[float, float]:
    """Equal-power gain pair (g_out, g_in) at fade position t in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        log.warning("crossfade position %.4f outside [0, 1]; clamping", t)
        t = min(1.0, max(0.0, t))
    return math.cos(math.pi * t / 2.0), math.sin(math.pi * t / 2.0)


def _fade_curves(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        t = np.array([1.0])
    else:
        t = np.arange(n, dtype=np.float64) / (n - 1)
    return np.cos(np.pi * t / 2.0), np.sin(np.pi * t / 2.0)


def mix_output(
    current: np.ndarray,
    nxt: np.ndarray,
    crossfade_ms: float,
    sample_rate: int = ENGINE_SAMPLE_RATE,
) -> np.ndarray:
    """Join two sample buffers with an equal-power overlap.

    The incoming clip starts crossfade_ms before the outgoing one ends;
    output length is len(current) + len(nxt) - overlap.
    """
    current = np.asarray(current, dtype=np.float64)
    nxt = np.asarray(nxt, dtype=np.float64)
    if current.ndim != 1 or nxt.ndim != 1:
        raise InvalidArgumentError("mix_output expects mono sample buffers")
    overlap = int(round(crossfade_ms / 1000.0 * sample_rate))
    if overlap <= 0 or overlap > min(current.size, nxt.size):
        raise InvalidArgumentError(
            f"overlap of {overlap} samples does not fit clips of "
            f"{current.size} and {nxt.size}"
        )
    g_out, g_in = _fade_curves(overlap)
    out = np.empty(current.size + nxt.size - overlap, dtype=np.float64)
    out[: current.size - overlap] = current[:-overlap]
    out[current.size - overlap : current.size] = (
        current[-overlap:] * g_out + nxt[:overlap] * g_in
    )
    out[current.size :] = nxt[overlap:]
    return out


def render_schedule(
    clips: list[AudioClip], crossfade_ms: float, sample_rate: int = ENGINE_SAMPLE_RATE
) -> AudioClip:
    """Render a clip schedule into one continuous stream.

    Consecutive clips overlap by the crossfade, so clip k starts at
    k * (clip_len - overlap) samples: the engine cadence.
    """
    if not clips:
        raise InvalidArgumentError("cannot render an empty schedule")
    for clip in clips:
        if clip.sample_rate != sample_rate:
            raise InvalidArgumentError(
                f"clip at {clip.sample_rate} Hz in a {sample_rate} Hz schedule"
            )
    out = clips[0].samples.astype(np.float64)
    for clip in clips[1:]:
        out = mix_output(out, clip.samples, crossfade_ms, sample_rate)
    return AudioClip(np.clip(out, -1.0, 1.0), sample_rate)
