"""Render a movement window as the color-coded trajectory image.

Each landmark's path over the window is drawn as a 2 px polyline in its own
fixed color on a black 256x256 canvas. No anti-aliasing: every non-black
pixel is an exact palette color, which keeps the encoder input crisp and the
output byte-for-byte checkable. Later landmarks overdraw earlier ones in
LandmarkId order.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .pose import LandmarkId, MovementWindow

IMAGE_SIZE = 256
LINE_WIDTH = 2

# Drawing order follows LandmarkId; index i is landmark i's RGB color.
PALETTE: tuple[tuple[int, int, int], ...] = (
    (255, 0, 0),      # head
    (0, 255, 0),      # left wrist
    (0, 0, 255),      # right wrist
    (255, 165, 0),    # left ankle
    (255, 0, 255),    # right ankle
)


def to_pixel(x: float, y: float, size: int = IMAGE_SIZE) -> tuple[int, int]:
    """Map normalized [-1, 1] coordinates to (row, col), clamping to the border."""
    col = int(np.floor((x + 1.0) * 0.5 * (size - 1) + 0.5))
    row = int(np.floor((y + 1.0) * 0.5 * (size - 1) + 0.5))
    col = min(size - 1, max(0, col))
    row = min(size - 1, max(0, row))
    return row, col


def _stamp(image: np.ndarray, rows: np.ndarray, cols: np.ndarray, color: tuple[int, int, int]) -> None:
    """Paint LINE_WIDTH x LINE_WIDTH blocks anchored at each (row, col)."""
    size = image.shape[0]
    for dr in range(LINE_WIDTH):
        for dc in range(LINE_WIDTH):
            r = np.clip(rows + dr, 0, size - 1)
            c = np.clip(cols + dc, 0, size - 1)
            image[r, c] = color


def _line_pixels(r0: int, c0: int, r1: int, c1: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer pixels of the segment, 8-connected, endpoints inclusive."""
    n = int(max(abs(r1 - r0), abs(c1 - c0))) + 1
    t = np.linspace(0.0, 1.0, n)
    rows = np.floor(r0 + (r1 - r0) * t + 0.5).astype(np.intp)
    cols = np.floor(c0 + (c1 - c0) * t + 0.5).astype(np.intp)
    return rows, cols


def rasterize(window: MovementWindow, size: int = IMAGE_SIZE) -> np.ndarray:
    """Draw the window's five landmark trajectories; returns (size, size, 3) uint8."""
    if not isinstance(window, MovementWindow):
        raise InvalidArgumentError("rasterize expects a MovementWindow")
    image = np.zeros((size, size, 3), dtype=np.uint8)
    pts = window.points_array()
    for lm in LandmarkId:
        color = PALETTE[lm]
        path = [to_pixel(x, y, size) for x, y in pts[:, lm, :]]
        for (r0, c0), (r1, c1) in zip(path, path[1:]):
            rows, cols = _line_pixels(r0, c0, r1, c1)
            _stamp(image, rows, cols, color)
    return image


def palette_colors() -> set[tuple[int, int, int]]:
    return set(PALETTE) | {(0, 0, 0)}


def image_to_float(image: np.ndarray) -> np.ndarray:
    """uint8 HxWx3 image as float32 in [0, 1] for the movement encoder."""
    return image.astype(np.float32) / 255.0


def write_png(path: str | Path, image: np.ndarray) -> None:
    """Lossless, byte-stable PNG export (fixed zlib level, no metadata chunks)."""
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise InvalidArgumentError("write_png expects an HxWx3 uint8 image")
    height, width = image.shape[:2]

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
        )

    raw = b"".join(b"\x00" + image[r].tobytes() for r in range(height))
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    data = (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw, 6))
        + chunk(b"IEND", b"")
    )
    Path(path).write_bytes(data)
