"""Cosine-similarity clip selection over the library latent matrix.

Exact linear scan with precomputed norms: at library scale (thousands of
clips x 128 dims) the scan is microseconds, and exactness means a replayed
session picks the same clips bit-for-bit. Ties break toward the smallest
clip id so the result never depends on manifest order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVectorError,
    EmptyLibraryError,
    InvalidArgumentError,
    PolicyExhaustedError,
)
from .library import ClipEntry, ClipLibrary


@dataclass(frozen=True)
class RetrievalPolicy:
    """anti_repeat_window: exclude the most recent N distinct selections (0 = plain argmax)."""

    anti_repeat_window: int = 0

    def __post_init__(self) -> None:
        if self.anti_repeat_window < 0:
            raise InvalidArgumentError("anti_repeat_window must be >= 0")


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"length mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError("cosine similarity undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))


def _scores(z_pred: np.ndarray, library: ClipLibrary) -> np.ndarray:
    z = np.asarray(z_pred, dtype=np.float64).reshape(-1)
    if z.shape[0] != library.latents.shape[1]:
        raise InvalidArgumentError(
            f"query length {z.shape[0]} != latent dim {library.latents.shape[1]}"
        )
    zn = np.linalg.norm(z)
    if zn == 0.0:
        raise DegenerateVectorError("cannot retrieve with a zero query vector")
    norms = library.norms
    if np.any(norms == 0.0):
        bad = library.entries[int(np.argmax(norms == 0.0))].id
        raise DegenerateVectorError(f"library clip {bad!r} has a zero latent")
    return (library.latents.astype(np.float64) @ z) / (norms * zn)


def top_k(z_pred: np.ndarray, library: ClipLibrary, k: int) -> list[tuple[ClipEntry, float]]:
    """Best k clips by cosine, scores non-increasing, ties by smallest id."""
    if len(library) == 0:
        raise EmptyLibraryError("cannot retrieve from an empty library")
    if k < 1:
        raise InvalidArgumentError("k must be >= 1")
    scores = _scores(z_pred, library)
    order = sorted(range(len(library)), key=lambda i: (-scores[i], library.entries[i].id))
    return [(library.entries[i], float(scores[i])) for i in order[:k]]


def retrieve(
    z_pred: np.ndarray,
    library: ClipLibrary,
    policy: RetrievalPolicy | None = None,
    recent_ids: list[str] | None = None,
) -> tuple[ClipEntry, float]:
    """Argmax of cosine over eligible clips.

    `recent_ids` is the caller's selection history (most recent last); the
    policy excludes the last anti_repeat_window distinct ids from it.
    """
    if len(library) == 0:
        raise EmptyLibraryError("cannot retrieve from an empty library")
    policy = policy or RetrievalPolicy()
    excluded: set[str] = set()
    if policy.anti_repeat_window and recent_ids:
        for clip_id in reversed(recent_ids):
            if clip_id not in excluded:
                excluded.add(clip_id)
            if len(excluded) >= policy.anti_repeat_window:
                break

    scores = _scores(z_pred, library)
    best_i = -1
    for i, entry in enumerate(library.entries):
        if entry.id in excluded:
            continue
        if best_i < 0 or scores[i] > scores[best_i] or (
            scores[i] == scores[best_i] and entry.id < library.entries[best_i].id
        ):
            best_i = i
    if best_i < 0:
        raise PolicyExhaustedError(
            f"anti_repeat_window={policy.anti_repeat_window} excluded every clip"
        )
    return library.entries[best_i], float(scores[best_i])
