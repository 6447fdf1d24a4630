"""Audio primitives: clips, WAV I/O, STFT, and encoder-ready spectrogram images.

Everything runs at a fixed engine rate of 22050 Hz mono. Files at other rates
or channel counts are downmixed (channel mean) and resampled with a
windowed-sinc polyphase filter on load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import get_window, resample_poly

from .errors import InsufficientDataError, InvalidArgumentError

ENGINE_SAMPLE_RATE = 22050
CLIP_SECONDS = 3.5
N_FFT = 1024
SPEC_SIZE = 224  # mel bands and time frames of the encoder input


@dataclass
class AudioClip:
    """Mono audio in [-1, 1] at a known sample rate."""

    samples: np.ndarray
    sample_rate: int = ENGINE_SAMPLE_RATE

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise InvalidArgumentError("AudioClip samples must be mono (1-D)")
        if self.sample_rate <= 0:
            raise InvalidArgumentError("sample rate must be positive")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise InvalidArgumentError("AudioClip samples must be finite")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def center_crop(self, duration_s: float) -> "AudioClip":
        """Middle duration_s seconds of the clip."""
        want = int(round(duration_s * self.sample_rate))
        if want > self.samples.size:
            raise InvalidArgumentError("clip shorter than requested crop")
        start = (self.samples.size - want) // 2
        return AudioClip(self.samples[start:start + want], self.sample_rate)


def load_wav(path: str | Path, target_sr: int = ENGINE_SAMPLE_RATE) -> AudioClip:
    """Read a PCM16/PCM32/float WAV, downmix to mono, resample to target_sr."""
    try:
        sr, data = wavfile.read(str(path))
    except ValueError as exc:
        raise InvalidArgumentError(f"{path}: not a readable WAV ({exc})") from None
    if data.ndim == 2:
        data = data.astype(np.float64).mean(axis=1)
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise InvalidArgumentError(f"{path}: unsupported WAV sample format {data.dtype}")
    samples = np.clip(samples, -1.0, 1.0)
    if sr != target_sr:
        g = math.gcd(int(sr), int(target_sr))
        samples = resample_poly(samples, target_sr // g, sr // g)
        samples = np.clip(samples, -1.0, 1.0)
    return AudioClip(samples, target_sr)


def save_wav(path: str | Path, clip: AudioClip) -> None:
    """Write float32 WAV; float keeps render-vs-analysis round trips exact."""
    wavfile.write(str(path), clip.sample_rate, clip.samples.astype(np.float32))


def stft(clip: AudioClip, n_fft: int = N_FFT, hop: int = 256, window: str = "hann") -> np.ndarray:
    """Centered short-time Fourier transform.

    Frame k is centered on sample k*hop with zero padding at the edges, for
    ceil(len/hop) frames of n_fft//2 + 1 bins. Returns complex128
    (n_frames, n_bins).
    """
    if clip.samples.size == 0:
        raise InvalidArgumentError("cannot transform an empty clip")
    if n_fft <= 0 or (n_fft & (n_fft - 1)) != 0:
        raise InvalidArgumentError("n_fft must be a power of two")
    if hop <= 0:
        raise InvalidArgumentError("hop must be positive")
    n = clip.samples.size
    n_frames = int(math.ceil(n / hop))
    half = n_fft // 2
    right = max(0, (n_frames - 1) * hop + n_fft - n - half)
    padded = np.pad(clip.samples, (half, right))
    win = get_window(window, n_fft, fftbins=True)
    frames = np.lib.stride_tricks.sliding_window_view(padded, n_fft)[::hop][:n_frames]
    return np.fft.rfft(frames * win, axis=1)


def frame_signal(samples: np.ndarray, n_fft: int = N_FFT, hop: int = 256) -> np.ndarray:
    """Non-centered frames fully inside the signal: (1 + (len-n_fft)//hop, n_fft).

    Feature extraction uses this framing so edge padding never leaks into
    frame-to-frame statistics like spectral flux.
    """
    if samples.size < n_fft:
        raise InsufficientDataError(
            f"signal of {samples.size} samples is shorter than one {n_fft}-sample frame"
        )
    return np.lib.stride_tricks.sliding_window_view(samples, n_fft)[::hop]


def hz_to_mel(f: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sr: int, fmin: float = 0.0, fmax: float | None = None) -> np.ndarray:
    """Triangular mel filterbank, (n_mels, n_fft//2 + 1)."""
    if fmax is None:
        fmax = sr / 2.0
    n_bins = n_fft // 2 + 1
    freqs = np.arange(n_bins) * sr / n_fft
    mel_pts = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    bank = np.zeros((n_mels, n_bins))
    for i in range(n_mels):
        lo, mid, hi = hz_pts[i], hz_pts[i + 1], hz_pts[i + 2]
        up = (freqs - lo) / max(mid - lo, 1e-12)
        down = (hi - freqs) / max(hi - mid, 1e-12)
        bank[i] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def mel_spectrogram_image(clip: AudioClip, expected_duration_s: float = CLIP_SECONDS) -> np.ndarray:
    """Encoder input: (224, 224, 1) float32 in [0, 1], row 0 = lowest band.

    Geometry: 224 mel bands over the full spectrum; hop = floor(len/224) so at
    least 224 centered frames exist, then a center crop to exactly 224. The
    log1p magnitudes are min-max normalized per image; a flat image (silence)
    maps to all zeros.
    """
    if abs(clip.duration_s - expected_duration_s) > 0.05 * expected_duration_s:
        raise InvalidArgumentError(
            f"clip is {clip.duration_s:.3f} s, expected {expected_duration_s} s +-5%"
        )
    hop = clip.samples.size // SPEC_SIZE
    if hop < 1:
        raise InvalidArgumentError("clip too short for a 224-frame spectrogram")
    spec = np.abs(stft(clip, N_FFT, hop))                     # (frames, bins)
    bank = mel_filterbank(SPEC_SIZE, N_FFT, clip.sample_rate)
    mel = bank @ spec.T                                        # (bands, frames)
    start = (mel.shape[1] - SPEC_SIZE) // 2
    mel = mel[:, start:start + SPEC_SIZE]
    img = np.log1p(mel)
    lo, hi = float(img.min()), float(img.max())
    if hi <= lo:
        return np.zeros((SPEC_SIZE, SPEC_SIZE, 1), dtype=np.float32)
    img = (img - lo) / (hi - lo)
    return img.astype(np.float32)[..., np.newaxis]
