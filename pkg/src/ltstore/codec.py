"""Canonical byte encoding.

Every value that is committed to, signed, hashed, shared or sent over the
simulated network goes through this module. The rules are deliberately
minimal:

* a byte string is an 8-byte big-endian length followed by the raw bytes;
* a list is an 8-byte big-endian item count followed by the item encodings;
* an unsigned integer is the byte-string encoding of its 8-byte big-endian form.

Composite records (commitments, timestamps, evidence entries) are built from
these three rules, so every encoding is self-delimiting and injective.
"""

from __future__ import annotations

from typing import Callable, Iterable, TypeVar

T = TypeVar("T")

LENGTH_BYTES = 8
MAX_LENGTH = (1 << 64) - 1


class EncodingError(ValueError):
    """Raised when a value cannot be encoded."""


class DecodingError(ValueError):
    """Raised when a byte string is not a well-formed encoding."""


def _prefix(n: int) -> bytes:
    if n < 0 or n > MAX_LENGTH:
        raise EncodingError(f"length {n} does not fit in 8 bytes")
    return n.to_bytes(LENGTH_BYTES, "big")


def encode_bytes(b: bytes) -> bytes:
    return _prefix(len(b)) + bytes(b)


def encode_list(items: Iterable[bytes]) -> bytes:
    items = list(items)
    return _prefix(len(items)) + b"".join(items)


def encode_uint(n: int) -> bytes:
    if n < 0 or n > MAX_LENGTH:
        raise EncodingError(f"integer {n} out of range")
    return encode_bytes(n.to_bytes(8, "big"))


class Reader:
    """Cursor over an encoded buffer.

    Decoders take a ``Reader`` so that nested structures can be parsed in a
    single pass without copying.
    """

    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes, pos: int = 0):
        self.buf = memoryview(buf) if not isinstance(buf, memoryview) else buf
        self.pos = pos

    def _length(self) -> int:
        end = self.pos + LENGTH_BYTES
        if end > len(self.buf):
            raise DecodingError("truncated length prefix")
        n = int.from_bytes(self.buf[self.pos:end], "big")
        self.pos = end
        return n

    def raw(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.buf):
            raise DecodingError("truncated payload")
        out = bytes(self.buf[self.pos:end])
        self.pos = end
        return out

    def byte(self) -> int:
        if self.pos >= len(self.buf):
            raise DecodingError("truncated payload")
        v = self.buf[self.pos]
        self.pos += 1
        return v

    def bytes(self) -> bytes:
        return self.raw(self._length())

    def uint(self) -> int:
        b = self.bytes()
        if len(b) != 8:
            raise DecodingError("integer field must be 8 bytes")
        return int.from_bytes(b, "big")

    def list(self, item: Callable[["Reader"], T]) -> list[T]:
        count = self._length()
        # every item needs at least one byte; rejects absurd counts early
        if count > len(self.buf) - self.pos:
            raise DecodingError("list count exceeds buffer")
        return [item(self) for _ in range(count)]

    def done(self) -> None:
        if self.pos != len(self.buf):
            raise DecodingError(f"{len(self.buf) - self.pos} trailing bytes")


def decode_all(buf: bytes, item: Callable[[Reader], T]) -> T:
    """Decode exactly one value occupying the whole buffer."""
    r = Reader(buf)
    out = item(r)
    r.done()
    return out


def decode_bytes(buf: bytes) -> bytes:
    return decode_all(buf, Reader.bytes)


def decode_bytes_list(buf: bytes) -> list[bytes]:
    """Decode a list whose items are all byte-string encodings."""
    return decode_all(buf, lambda r: r.list(Reader.bytes))


def decode_uint(buf: bytes) -> int:
    return decode_all(buf, Reader.uint)


def pad(payload: bytes, width: int) -> bytes:
    """Length-prefixed padding to a fixed total size of ``width + 8`` bytes."""
    if len(payload) > width:
        raise EncodingError(f"payload of {len(payload)} bytes exceeds pad width {width}")
    return encode_bytes(payload) + bytes(width - len(payload))


def unpad(padded: bytes) -> bytes:
    r = Reader(padded)
    payload = r.bytes()
    if any(padded[r.pos:]):
        raise DecodingError("non-zero padding")
    return payload
