"""Clip library: curated audio palette with precomputed latents.

A library directory holds the audio files, a human-editable `library.json`
manifest, and a `latents.bin` sidecar (same tensor container as weight
bundles, one 128-d tensor per clip id). Latents are always the output of
mel_spectrogram_image -> audio encoder mu over the center-cropped clip, so a
rebuild from the same files and weights is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsp import CLIP_SECONDS, AudioClip, load_wav, mel_spectrogram_image
from .errors import (
    EmptyLibraryError,
    IdCollisionError,
    InvalidArgumentError,
    LibraryError,
    LibraryLockedError,
    UnknownClipError,
)
from .neural import LATENT_DIM, WeightBundle, bundle_sha256, encode, load_container, save_container

log = logging.getLogger(__name__)

MANIFEST_NAME = "library.json"
LATENTS_NAME = "latents.bin"
LOCK_NAME = "library.lock"
MANIFEST_VERSION = 1


@dataclass
class ClipEntry:
    id: str
    file: str
    sha256: str
    duration_s: float = CLIP_SECONDS
    tags: list[str] = field(default_factory=list)
    gain_db: float = 0.0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "file": self.file,
            "sha256": self.sha256,
            "duration_s": self.duration_s,
            "tags": list(self.tags),
            "gain_db": self.gain_db,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ClipEntry":
        try:
            return cls(
                id=str(obj["id"]),
                file=str(obj["file"]),
                sha256=str(obj["sha256"]),
                duration_s=float(obj.get("duration_s", CLIP_SECONDS)),
                tags=[str(t) for t in obj.get("tags", [])],
                gain_db=float(obj.get("gain_db", 0.0)),
            )
        except KeyError as exc:
            raise LibraryError(f"manifest entry missing field {exc}") from None


@dataclass
class ClipLibrary:
    """Loaded library: manifest entries plus the latent matrix for retrieval."""

    root: Path
    entries: list[ClipEntry]
    latents: np.ndarray  # (n, LATENT_DIM) float32, rows follow `entries`
    weights_sha256: str

    def __post_init__(self) -> None:
        if not self.entries:
            raise EmptyLibraryError(f"library at {self.root} has no clips")
        if self.latents.shape != (len(self.entries), LATENT_DIM):
            raise LibraryError(
                f"latent matrix {self.latents.shape} does not match "
                f"{len(self.entries)} clips x {LATENT_DIM}"
            )
        self._by_id = {e.id: i for i, e in enumerate(self.entries)}
        if len(self._by_id) != len(self.entries):
            raise IdCollisionError("duplicate clip ids in manifest")
        # cached for the retrieval hot path
        self.norms = np.linalg.norm(self.latents.astype(np.float64), axis=1)

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def entry(self, clip_id: str) -> ClipEntry:
        try:
            return self.entries[self._by_id[clip_id]]
        except KeyError:
            raise UnknownClipError(f"no clip with id {clip_id!r}") from None

    def latent(self, clip_id: str) -> np.ndarray:
        try:
            return self.latents[self._by_id[clip_id]]
        except KeyError:
            raise UnknownClipError(f"no clip with id {clip_id!r}") from None

    def audio_path(self, clip_id: str) -> Path:
        return self.root / self.entry(clip_id).file

    def load_audio(self, clip_id: str) -> AudioClip:
        entry = self.entry(clip_id)
        clip = load_wav(self.audio_path(clip_id)).center_crop(entry.duration_s)
        if entry.gain_db:
            gained = clip.samples * 10.0 ** (entry.gain_db / 20.0)
            clip = AudioClip(np.clip(gained, -1.0, 1.0), clip.sample_rate)
        return clip

    def content_hash(self) -> str:
        """Digest over ids + latents, for session-log headers."""
        h = hashlib.sha256()
        for entry, latent in zip(self.entries, self.latents):
            h.update(entry.id.encode("utf-8"))
            h.update(b"\x00")
            h.update(np.ascontiguousarray(latent, dtype="<f4").tobytes())
        return h.hexdigest()


# --- hashing and encoding --------------------------------------------------------

def _file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def encode_clip(path: Path, weights: WeightBundle, clip_s: float = CLIP_SECONDS) -> np.ndarray:
    """Audio file -> 128-d latent (posterior mean), the canonical library path."""
    clip = load_wav(path)
    # compare in samples: a clip of exactly round(clip_s * sr) samples is long enough
    if clip.samples.size < int(round(clip_s * clip.sample_rate)):
        raise InvalidArgumentError(
            f"{path.name}: {clip.duration_s:.3f} s is shorter than the {clip_s} s clip length"
        )
    cropped = clip.center_crop(clip_s)
    image = mel_spectrogram_image(cropped, expected_duration_s=clip_s)
    mu, _ = encode(image, weights, "audio_encoder")
    return mu


# --- persistence ------------------------------------------------------------------

def _write_manifest(root: Path, entries: list[ClipEntry], weights_sha: str) -> None:
    doc = {
        "version": MANIFEST_VERSION,
        "weights_sha256": weights_sha,
        "clips": [e.to_json() for e in entries],
    }
    tmp = root / (MANIFEST_NAME + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, root / MANIFEST_NAME)


def _write_latents(root: Path, latents: dict[str, np.ndarray]) -> None:
    tmp = root / (LATENTS_NAME + ".tmp")
    save_container(tmp, latents)
    os.replace(tmp, root / LATENTS_NAME)


@contextmanager
def writer_lock(root: Path):
    """Exclusive curation lock; concurrent writers get LibraryLockedError."""
    lock_path = Path(root) / LOCK_NAME
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LibraryLockedError(
            f"{lock_path} exists; another curation operation is in progress"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode("ascii"))
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(lock_path)
        except FileNotFoundError:
            pass


def build_library(
    audio_dir: str | Path,
    weights: WeightBundle,
    out_dir: str | Path | None = None,
    clip_s: float = CLIP_SECONDS,
) -> ClipLibrary:
    """Scan a directory of WAVs, encode each, write manifest + latent sidecar.

    Files are processed in sorted filename order; ids are filename stems.
    Unreadable or too-short files are skipped with a warning.
    """
    audio_dir = Path(audio_dir)
    root = Path(out_dir) if out_dir is not None else audio_dir
    root.mkdir(parents=True, exist_ok=True)
    if not audio_dir.is_dir():
        raise InvalidArgumentError(f"{audio_dir} is not a directory")

    weights_sha = bundle_sha256(weights)
    entries: list[ClipEntry] = []
    latents: dict[str, np.ndarray] = {}
    seen: set[str] = set()
    for path in sorted(audio_dir.glob("*.wav")):
        clip_id = path.stem
        if clip_id in seen:
            raise IdCollisionError(f"duplicate clip id {clip_id!r} from {path.name}")
        try:
            latent = encode_clip(path, weights, clip_s)
        except Exception as exc:  # per-file isolation: a bad file never kills the build
            log.warning("skipping %s: %s", path.name, exc)
            continue
        seen.add(clip_id)
        file_field = path.name if root == audio_dir else os.path.relpath(path, root)
        entries.append(
            ClipEntry(id=clip_id, file=file_field, sha256=_file_sha256(path), duration_s=clip_s)
        )
        latents[clip_id] = latent
    if not entries:
        raise EmptyLibraryError(f"no valid clips found in {audio_dir}")

    with writer_lock(root):
        _write_manifest(root, entries, weights_sha)
        _write_latents(root, latents)
    log.info("built library with %d clips at %s", len(entries), root)
    return load_library(root, verify_files=False)


def load_library(
    root: str | Path,
    weights: WeightBundle | None = None,
    verify_files: bool = True,
    rebuild_on_mismatch: bool = True,
) -> ClipLibrary:
    """Load manifest + latents. With `weights` given, a weight-hash mismatch
    triggers a warning and an in-place latent rebuild (or LibraryError when
    rebuild_on_mismatch is False)."""
    root = Path(root)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise LibraryError(f"no {MANIFEST_NAME} in {root}")
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LibraryError(f"{manifest_path} is not valid JSON: {exc}") from None
    if doc.get("version") != MANIFEST_VERSION:
        raise LibraryError(f"unsupported manifest version {doc.get('version')!r}")
    entries = [ClipEntry.from_json(obj) for obj in doc.get("clips", [])]
    if not entries:
        raise EmptyLibraryError(f"library at {root} has no clips")
    weights_sha = str(doc.get("weights_sha256", ""))

    if verify_files:
        for entry in entries:
            path = root / entry.file
            if not path.is_file():
                raise LibraryError(f"clip file missing: {path}")
            digest = _file_sha256(path)
            if digest != entry.sha256:
                raise LibraryError(
                    f"{entry.file}: content hash {digest[:12]} does not match manifest"
                )

    if weights is not None and bundle_sha256(weights) != weights_sha:
        if not rebuild_on_mismatch:
            raise LibraryError("library latents were built with different weights")
        log.warning("weight hash mismatch for %s; re-encoding %d clips", root, len(entries))
        return rebuild_latents(root, weights, entries)

    stored = load_container(root / LATENTS_NAME)
    rows = []
    for entry in entries:
        latent = stored.get(entry.id)
        if latent is None or latent.shape != (LATENT_DIM,):
            raise LibraryError(f"latent sidecar missing or malformed for {entry.id!r}")
        rows.append(latent)
    return ClipLibrary(
        root=root,
        entries=entries,
        latents=np.stack(rows).astype(np.float32),
        weights_sha256=weights_sha,
    )


def rebuild_latents(
    root: str | Path, weights: WeightBundle, entries: list[ClipEntry] | None = None
) -> ClipLibrary:
    """Re-encode every manifest entry with the given weights and rewrite the sidecar."""
    root = Path(root)
    if entries is None:
        entries = load_library(root, verify_files=False).entries
    latents = {e.id: encode_clip(root / e.file, weights, e.duration_s) for e in entries}
    with writer_lock(root):
        _write_manifest(root, entries, bundle_sha256(weights))
        _write_latents(root, latents)
    return load_library(root, verify_files=False)


def add_clip(
    root: str | Path,
    wav_path: str | Path,
    weights: WeightBundle,
    clip_id: str | None = None,
    tags: list[str] | None = None,
    gain_db: float = 0.0,
) -> ClipLibrary:
    """Encode one new clip and splice it into an existing library atomically."""
    root = Path(root)
    wav_path = Path(wav_path)
    library = load_library(root, verify_files=False)
    clip_id = clip_id or wav_path.stem
    if clip_id in set(library.ids()):
        raise IdCollisionError(f"clip id {clip_id!r} already present")

    latent = encode_clip(wav_path, weights, CLIP_SECONDS)
    dest = root / wav_path.name
    if not dest.exists():
        dest.write_bytes(wav_path.read_bytes())
    entry = ClipEntry(
        id=clip_id,
        file=dest.name,
        sha256=_file_sha256(dest),
        duration_s=CLIP_SECONDS,
        tags=tags or [],
        gain_db=gain_db,
    )
    entries = library.entries + [entry]
    entries.sort(key=lambda e: e.file)
    stored = load_container(root / LATENTS_NAME)
    stored[clip_id] = latent
    with writer_lock(root):
        _write_manifest(root, entries, library.weights_sha256)
        _write_latents(root, stored)
    return load_library(root, verify_files=False)


def remove_clip(root: str | Path, clip_id: str) -> list[ClipEntry]:
    """Drop a clip from the manifest and sidecar; the audio file is kept.

    Returns the remaining entries (possibly empty; an empty library only
    errors on the next engine start, not here).
    """
    root = Path(root)
    library = load_library(root, verify_files=False)
    if clip_id not in set(library.ids()):
        raise UnknownClipError(f"no clip with id {clip_id!r}")
    entries = [e for e in library.entries if e.id != clip_id]
    stored = load_container(root / LATENTS_NAME)
    stored.pop(clip_id, None)
    with writer_lock(root):
        _write_manifest(root, entries, library.weights_sha256)
        _write_latents(root, stored)
    return entries
