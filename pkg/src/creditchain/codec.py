"""Canonical byte encoding used for signing payloads and ledger export.

Every structure that gets signed, hashed, or written to disk goes through
these helpers: fixed-width big-endian integers and length-prefixed byte
strings, concatenated in a documented field order.  Two encoders given the
same values always produce the same bytes, which is what makes transcript
digests and replay comparisons meaningful.
"""

from __future__ import annotations

import struct


class DecodeError(ValueError):
    """Raised when a byte stream does not match the expected layout."""


def u8(value: int) -> bytes:
    return struct.pack(">B", value)


def u16(value: int) -> bytes:
    return struct.pack(">H", value)


def u32(value: int) -> bytes:
    return struct.pack(">I", value)


def u64(value: int) -> bytes:
    return struct.pack(">Q", value)


def blob(data: bytes) -> bytes:
    """Length-prefixed byte string: u32 length followed by the raw bytes."""
    return u32(len(data)) + data


def pack(*fields: bytes) -> bytes:
    """Concatenate fields, each individually length-prefixed.

    The prefix makes the encoding unambiguous: no arrangement of field
    contents can collide with a different field split.
    """
    return b"".join(blob(f) for f in fields)


def text(value: str) -> bytes:
    return value.encode("utf-8")


class ByteReader:
    """Sequential reader for data produced by the encoders above."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise DecodeError(f"needed {n} bytes at offset {self._pos}, stream exhausted")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return struct.unpack(">B", self.take(1))[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())

    def remaining(self) -> int:
        return len(self._data) - self._pos

    def expect_end(self) -> None:
        if self.remaining():
            raise DecodeError(f"{self.remaining()} trailing bytes after expected end")


def unpack(data: bytes, count: int) -> list[bytes]:
    """Inverse of pack() for a known field count."""
    reader = ByteReader(data)
    fields = [reader.blob() for _ in range(count)]
    reader.expect_end()
    return fields
