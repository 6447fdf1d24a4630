"""The 47-dimensional audio feature vector used by the coupling analysis.

Registry (fixed order): 13 MFCC means, 7 spectral-contrast bands, 12 chroma
bins, then 15 scalar descriptors. All features are frame-level statistics
averaged over non-centered frames (n_fft 1024, hop 256), except
zero_crossing_rate and rms which are whole-clip, and onset_rate /
tempo_estimate which come from the onset-strength envelope.

Definitions that have competing formulations in the wild are pinned here:

* MFCC: 40-band mel filterbank on the power spectrum, log, orthonormal
  DCT-II; mfcc_1 is the 0th coefficient (overall spectral shape).
* spectral contrast: 7 octave bands with edges 0/200/400/.../6400/sr2 Hz;
  log mean of the top 20% of in-band power minus log mean of the bottom 20%.
* chroma: power summed per pitch class (bin index 0 = C, A440 = index 9),
  each frame normalized to unit sum.
* dissonance: Plomp-Levelt pair roughness summed over the top 20 peaks of
  the time-averaged power spectrum (Sethares' parametrization).
* inharmonicity: amplitude-weighted relative deviation of those peaks from
  integer multiples of the strongest peak.
* loudness: A-weighted total power of the mean spectrum in dB.
* tempo_estimate: autocorrelation peak of the onset envelope inside the
  60-180 BPM band, in BPM; 0.0 when the envelope carries no variance.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dct

from .dsp import N_FFT, AudioClip, frame_signal, mel_filterbank
from .errors import InsufficientDataError, InvalidArgumentError

HOP = 256
N_MELS = 40
EPS = 1e-10

MFCC_NAMES = [f"mfcc_{i}" for i in range(1, 14)]
CONTRAST_NAMES = [f"spec_contrast_{i}" for i in range(1, 8)]
CHROMA_NAMES = [f"chroma_{i}" for i in range(1, 13)]
SCALAR_NAMES = [
    "spectral_flux",
    "spectral_centroid",
    "spectral_bandwidth",
    "spectral_rolloff",
    "spectral_flatness",
    "zero_crossing_rate",
    "rms",
    "spectral_crest",
    "spectral_entropy",
    "dissonance",
    "inharmonicity",
    "loudness",
    "onset_rate",
    "tempo_estimate",
    "high_frequency_content",
]
FEATURE_NAMES: tuple[str, ...] = tuple(MFCC_NAMES + CONTRAST_NAMES + CHROMA_NAMES + SCALAR_NAMES)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 47

_CONTRAST_EDGES = (0.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0)


def _hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def _mfcc_means(power: np.ndarray, sr: int) -> np.ndarray:
    bank = mel_filterbank(N_MELS, N_FFT, sr)
    mel = power @ bank.T
    cep = dct(np.log(mel + EPS), type=2, norm="ortho", axis=1)
    return cep[:, :13].mean(axis=0)


def _contrast_means(power: np.ndarray, freqs: np.ndarray, sr: int) -> np.ndarray:
    edges = list(_CONTRAST_EDGES) + [sr / 2.0]
    out = np.zeros(7)
    for b in range(7):
        sel = (freqs >= edges[b]) & (freqs < edges[b + 1])
        band = np.sort(power[:, sel], axis=1)
        nb = band.shape[1]
        q = max(1, int(round(0.2 * nb)))
        valley = band[:, :q].mean(axis=1)
        peak = band[:, nb - q:].mean(axis=1)
        out[b] = float(np.mean(np.log(peak + EPS) - np.log(valley + EPS)))
    return out


def _chroma_means(power: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    audible = (freqs >= 32.0) & (freqs <= 8000.0)
    f = freqs[audible]
    pc = (np.round(12.0 * np.log2(f / 440.0)).astype(int) + 9) % 12
    chroma = np.zeros((power.shape[0], 12))
    for c in range(12):
        chroma[:, c] = power[:, audible][:, pc == c].sum(axis=1)
    totals = chroma.sum(axis=1, keepdims=True)
    np.divide(chroma, totals, out=chroma, where=totals > 0)
    return chroma.mean(axis=0)


def _spectral_peaks(mean_power: np.ndarray, freqs: np.ndarray, top: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Top local maxima of the averaged spectrum: (freqs, normalized amps)."""
    p = mean_power
    local = (p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:])
    idx = np.where(local)[0] + 1
    idx = idx[p[idx] > EPS]
    if idx.size == 0:
        return np.array([]), np.array([])
    order = np.argsort(p[idx])[::-1][:top]
    idx = idx[order]
    amps = np.sqrt(p[idx])
    return freqs[idx], amps / amps.sum()


def _dissonance(peak_f: np.ndarray, peak_a: np.ndarray) -> float:
    if peak_f.size < 2:
        return 0.0
    order = np.argsort(peak_f)
    f, a = peak_f[order], peak_a[order]
    total = 0.0
    for i in range(f.size - 1):
        s = 0.24 / (0.0207 * f[i] + 18.96)
        df = f[i + 1:] - f[i]
        rough = np.exp(-3.5 * s * df) - np.exp(-5.75 * s * df)
        total += float(np.sum(a[i] * a[i + 1:] * rough))
    return total


def _inharmonicity(peak_f: np.ndarray, peak_a: np.ndarray) -> float:
    if peak_f.size < 2:
        return 0.0
    f0 = peak_f[np.argmax(peak_a)]
    if f0 <= 0:
        return 0.0
    n = np.maximum(1, np.round(peak_f / f0))
    dev = np.abs(peak_f - n * f0) / (n * f0)
    return float(np.sum(peak_a * dev) / np.sum(peak_a))


def _a_weight_gain(freqs: np.ndarray) -> np.ndarray:
    f2 = np.maximum(freqs, 1e-3) ** 2
    ra = (12194.0 ** 2 * f2 ** 2) / (
        (f2 + 20.6 ** 2)
        * np.sqrt((f2 + 107.7 ** 2) * (f2 + 737.9 ** 2))
        * (f2 + 12194.0 ** 2)
    )
    db = 20.0 * np.log10(np.maximum(ra, 1e-12)) + 2.0
    return 10.0 ** (db / 20.0)


def _onset_envelope(mag: np.ndarray) -> np.ndarray:
    diff = np.diff(mag, axis=0)
    return np.sum(np.maximum(diff, 0.0), axis=1)


# An onset envelope that never moves more than this fraction of the mean
# frame magnitude is treated as stationary; spectral-leakage wobble on a
# steady tone sits orders of magnitude below it.
ONSET_FLOOR = 1e-3


def _onset_rate(envelope: np.ndarray, frame_rate: float, scale: float) -> float:
    if envelope.size < 3:
        return 0.0
    std = float(np.std(envelope))
    if std <= 0 or float(envelope.max()) <= ONSET_FLOOR * scale:
        return 0.0
    thresh = float(np.mean(envelope)) + std
    local = (envelope[1:-1] > envelope[:-2]) & (envelope[1:-1] >= envelope[2:])
    count = int(np.sum(local & (envelope[1:-1] > thresh)))
    return count * frame_rate / envelope.size


def _tempo_estimate(envelope: np.ndarray, frame_rate: float, scale: float,
                    lo_bpm: float = 60.0, hi_bpm: float = 180.0) -> float:
    if envelope.size < 4 or float(np.std(envelope)) <= 0:
        return 0.0
    if float(envelope.max()) <= ONSET_FLOOR * scale:
        return 0.0
    x = envelope - envelope.mean()
    ac = np.correlate(x, x, mode="full")[x.size - 1:]
    lag_min = max(1, int(np.floor(frame_rate * 60.0 / hi_bpm)))
    lag_max = min(x.size - 1, int(np.ceil(frame_rate * 60.0 / lo_bpm)))
    if lag_max < lag_min:
        return 0.0
    lag = lag_min + int(np.argmax(ac[lag_min:lag_max + 1]))
    bpm = 60.0 * frame_rate / lag
    return float(np.clip(bpm, lo_bpm, hi_bpm))


def extract_features(clip: AudioClip) -> "AudioFeatureVector":
    """Extract the fixed 47-feature vector. Deterministic per clip."""
    frames = frame_signal(clip.samples, N_FFT, HOP)
    if frames.shape[0] < 1:
        raise InsufficientDataError("clip shorter than one STFT frame")
    spec = np.fft.rfft(frames * _hann(N_FFT), axis=1)
    mag = np.abs(spec)
    power = mag ** 2
    sr = clip.sample_rate
    freqs = np.arange(power.shape[1]) * sr / N_FFT
    total = power.sum(axis=1)
    safe_total = np.maximum(total, EPS)

    values = np.zeros(N_FEATURES)
    values[0:13] = _mfcc_means(power, sr)
    values[13:20] = _contrast_means(power, freqs, sr)
    values[20:32] = _chroma_means(power, freqs)

    # spectral_flux
    if mag.shape[0] >= 2:
        d = np.maximum(mag[1:] - mag[:-1], 0.0)
        values[32] = float(np.mean(np.sqrt(np.sum(d * d, axis=1))))
    # centroid / bandwidth / rolloff
    centroid = (power @ freqs) / safe_total
    values[33] = float(np.mean(centroid))
    spread = np.sqrt(np.sum(power * (freqs[None, :] - centroid[:, None]) ** 2, axis=1) / safe_total)
    values[34] = float(np.mean(spread))
    cum = np.cumsum(power, axis=1)
    roll_idx = np.argmax(cum >= 0.85 * safe_total[:, None], axis=1)
    values[35] = float(np.mean(freqs[roll_idx]))
    # flatness
    geo = np.exp(np.mean(np.log(power + EPS), axis=1))
    values[36] = float(np.mean(geo / (np.mean(power, axis=1) + EPS)))
    # zero crossings and rms over the whole clip
    s = clip.samples
    values[37] = float(np.mean(np.signbit(s[1:]) != np.signbit(s[:-1]))) if s.size > 1 else 0.0
    values[38] = float(np.sqrt(np.mean(s * s)))
    # crest and entropy
    values[39] = float(np.mean(power.max(axis=1) / (power.mean(axis=1) + EPS)))
    pn = power / safe_total[:, None]
    ent = -np.sum(np.where(pn > 0, pn * np.log(pn + EPS), 0.0), axis=1) / np.log(power.shape[1])
    values[40] = float(np.mean(np.where(total > EPS, ent, 0.0)))
    # psychoacoustic trio from the averaged spectrum
    mean_power = power.mean(axis=0)
    peak_f, peak_a = _spectral_peaks(mean_power, freqs)
    values[41] = _dissonance(peak_f, peak_a)
    values[42] = _inharmonicity(peak_f, peak_a)
    values[43] = float(10.0 * np.log10(np.sum(_a_weight_gain(freqs) ** 2 * mean_power) + EPS))
    # onsets and tempo
    frame_rate = sr / HOP
    envelope = _onset_envelope(mag)
    mag_scale = float(mag.sum(axis=1).mean())
    values[44] = _onset_rate(envelope, frame_rate, mag_scale)
    values[45] = _tempo_estimate(envelope, frame_rate, mag_scale)
    # quadratically weighted high-frequency content
    k = np.arange(1, power.shape[1] + 1, dtype=np.float64)
    values[46] = float(np.mean((power @ (k ** 2)) / safe_total))

    return AudioFeatureVector(values)


class AudioFeatureVector:
    """Fixed-order bundle of the 47 features; indexable by name."""

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (N_FEATURES,):
            raise InvalidArgumentError(f"expected {N_FEATURES} features, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("feature vector contains non-finite values")
        self.values = values

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_NAMES.index(name)])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(FEATURE_NAMES, self.values)}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AudioFeatureVector) and np.array_equal(self.values, other.values)
