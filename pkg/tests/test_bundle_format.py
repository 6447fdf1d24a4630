"""Binary tensor container: byte identity and per-corruption error types."""

from __future__ import annotations

import struct
import zlib

import numpy as np
import pytest

from dancemix.errors import (
    BadMagicError,
    BundleError,
    ChecksumMismatchError,
    TruncatedBundleError,
    UnsupportedVersionError,
)
from dancemix.neural.bundle import MAGIC, read_container, write_container


@pytest.fixture()
def tensors(rng):
    return {
        "beta": rng.standard_normal((3, 4)).astype(np.float32),
        "alpha": rng.standard_normal(7).astype(np.float32),
        "gamma/nested": rng.standard_normal((2, 2, 2)).astype(np.float32),
    }


class TestRoundTrip:
    def test_values_and_shapes_survive(self, tensors):
        loaded = read_container(write_container(tensors))
        assert set(loaded) == set(tensors)
        for name in tensors:
            np.testing.assert_array_equal(loaded[name], tensors[name])
            assert loaded[name].dtype == np.float32

    def test_save_load_save_byte_identity(self, tensors):
        first = write_container(tensors)
        second = write_container(read_container(first))
        assert first == second

    def test_insertion_order_does_not_matter(self, tensors):
        reordered = dict(reversed(list(tensors.items())))
        assert write_container(tensors) == write_container(reordered)

    def test_scalar_tensor(self):
        data = write_container({"s": np.float32(2.5)})
        loaded = read_container(data)
        assert loaded["s"].shape == ()
        assert float(loaded["s"]) == 2.5

    def test_empty_container(self):
        assert read_container(write_container({})) == {}


class TestCorruption:
    def test_bad_magic(self, tensors):
        data = b"XXXX" + write_container(tensors)[4:]
        with pytest.raises(BadMagicError):
            read_container(data)

    def test_unsupported_version(self, tensors):
        data = bytearray(write_container(tensors))
        data[4:8] = struct.pack("<I", 99)
        with pytest.raises(UnsupportedVersionError):
            read_container(bytes(data))

    def test_truncation_inside_payload(self, tensors):
        data = write_container(tensors)
        with pytest.raises(TruncatedBundleError):
            read_container(data[: len(data) // 2])

    def test_truncated_checksum(self, tensors):
        data = write_container(tensors)
        with pytest.raises(TruncatedBundleError):
            read_container(data[:-2])

    def test_flipped_bit_fails_checksum(self, tensors):
        data = bytearray(write_container(tensors))
        data[len(data) // 2] ^= 0x01
        with pytest.raises(ChecksumMismatchError):
            read_container(bytes(data))

    def test_corruption_errors_are_distinct_types(self):
        kinds = {BadMagicError, UnsupportedVersionError, TruncatedBundleError,
                 ChecksumMismatchError}
        assert len(kinds) == 4
        for kind in kinds:
            assert issubclass(kind, BundleError)

    def test_trailing_garbage_rejected(self, tensors):
        data = write_container(tensors)
        with pytest.raises(BundleError):
            read_container(data[:-4] + b"\x00" * 8 + data[-4:])

    def test_empty_file(self):
        with pytest.raises(TruncatedBundleError):
            read_container(b"")

    def test_unknown_dtype_code(self):
        body = MAGIC + struct.pack("<II", 1, 1)
        body += struct.pack("<H", 1) + b"t" + struct.pack("<BB", 7, 1) + struct.pack("<I", 0)
        data = body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
        with pytest.raises(BundleError):
            read_container(data)
