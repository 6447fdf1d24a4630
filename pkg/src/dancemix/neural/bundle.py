"""The DMWB binary tensor container.

Layout (little-endian, normative):

    magic   "DMWB" (4 bytes)
    u32     version = 1
    u32     tensor_count
    per tensor:
        u16     name_len
        bytes   UTF-8 name
        u8      dtype (0 = float32)
        u8      ndim
        u32     dims[ndim]
        bytes   row-major float32 payload
    u32     CRC-32 of all preceding bytes

Writers emit tensors sorted by name so identical contents serialize to
identical bytes. The same container carries engine weight bundles and the
clip-library latent sidecar; weight-bundle semantics (the architecture
manifest) live in models.py.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import (
    BadMagicError,
    BundleError,
    ChecksumMismatchError,
    InvalidArgumentError,
    TruncatedBundleError,
    UnsupportedVersionError,
)

MAGIC = b"DMWB"
VERSION = 1
DTYPE_F32 = 0


def write_container(tensors: dict[str, np.ndarray]) -> bytes:
    """Serialize name->array map; deterministic byte-for-byte."""
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name in sorted(tensors):
        # asarray with order="C" keeps 0-d tensors 0-d; ascontiguousarray would
        # silently promote them to shape (1,)
        arr = np.asarray(tensors[name], dtype=np.float32, order="C")
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise InvalidArgumentError(f"tensor name too long: {name!r}")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<BB", DTYPE_F32, arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.astype("<f4").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedBundleError(f"file ends inside {what}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out


def read_container(data: bytes) -> dict[str, np.ndarray]:
    """Parse container bytes; raises a distinct error per corruption kind."""
    r = _Reader(data)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise BadMagicError(f"expected {MAGIC!r}, found {magic!r}")
    version, count = struct.unpack("<II", r.take(8, "header"))
    if version != VERSION:
        raise UnsupportedVersionError(f"container version {version} not supported")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", r.take(2, "tensor name length"))
        name = r.take(name_len, "tensor name").decode("utf-8")
        dtype, ndim = struct.unpack("<BB", r.take(2, "tensor header"))
        if dtype != DTYPE_F32:
            raise BundleError(f"tensor {name!r}: unknown dtype code {dtype}")
        dims = struct.unpack(f"<{ndim}I", r.take(4 * ndim, "tensor dims"))
        n_items = int(np.prod(dims, dtype=np.int64)) if ndim else 1
        payload = r.take(4 * n_items, f"tensor {name!r} payload")
        if name in tensors:
            raise BundleError(f"duplicate tensor name {name!r}")
        tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    remaining = len(data) - r.pos
    if remaining < 4:
        raise TruncatedBundleError("missing trailing checksum")
    if remaining > 4:
        raise BundleError(f"{remaining - 4} unexpected bytes before checksum")
    (stored_crc,) = struct.unpack("<I", data[-4:])
    actual_crc = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumMismatchError(
            f"checksum 0x{stored_crc:08x} does not match payload 0x{actual_crc:08x}"
        )
    return tensors


def save_container(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(write_container(tensors))


def load_container(path: str | Path) -> dict[str, np.ndarray]:
    return read_container(Path(path).read_bytes())


# Manifest-aware file helpers; the heavy lifting lives in models.py because
# the manifest schema belongs with the model wiring.

def save_weight_bundle(path: str | Path, bundle) -> None:
    from .models import serialize_bundle

    Path(path).write_bytes(serialize_bundle(bundle))


def load_weight_bundle(path: str | Path):
    from .models import deserialize_bundle

    return deserialize_bundle(Path(path).read_bytes())
