"""Immutable records shared by the crypto, evidence and party layers.

Each record knows its canonical encoding (see :mod:`ltstore.codec`) and
caches it, because evidence chains re-encode the same entries many times
while building and verifying commitment messages.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .codec import DecodingError, Reader, decode_all, encode_bytes, encode_list, encode_uint


class Op(enum.IntEnum):
    WRITE = 0
    READ = 1
    RECOM = 2
    RETS = 3


# Evidence-service chain heads carry no operation.
NO_OP_BYTE = 0xFF

_OP_NAMES = {Op.WRITE: "Write", Op.READ: "Read", Op.RECOM: "ReCom", Op.RETS: "ReTs"}


def op_name(op: Optional[Op]) -> str:
    return "-" if op is None else _OP_NAMES[op]


@dataclass(frozen=True)
class Commitment:
    instance_id: str
    y: bytes  # H(r), hash-length digest
    a: bytes  # nonzero field element, big-endian
    b: bytes  # field element, big-endian
    _enc: Optional[bytes] = field(default=None, repr=False, compare=False)

    def encode(self) -> bytes:
        if self._enc is None:
            enc = encode_list([encode_bytes(self.instance_id.encode()), encode_bytes(self.y),
                               encode_bytes(self.a), encode_bytes(self.b)])
            object.__setattr__(self, "_enc", enc)
        return self._enc  # type: ignore[return-value]

    @classmethod
    def read(cls, r: Reader) -> "Commitment":
        start = r.pos
        fields = r.list(Reader.bytes)
        if len(fields) != 4:
            raise DecodingError("commitment has 4 fields")
        iid, y, a, b = fields
        return cls(_decode_id(iid), y, a, b, bytes(r.buf[start:r.pos]))

    @classmethod
    def decode(cls, buf: bytes) -> "Commitment":
        return decode_all(buf, cls.read)


@dataclass(frozen=True)
class Decommitment:
    r: bytes

    def encode(self) -> bytes:
        return encode_bytes(self.r)

    @classmethod
    def read(cls, r: Reader) -> "Decommitment":
        return cls(r.bytes())

    @classmethod
    def decode(cls, buf: bytes) -> "Decommitment":
        return decode_all(buf, cls.read)


@dataclass(frozen=True)
class Timestamp:
    t: int  # simulated days since 2018-01-01
    instance_id: str
    sig: bytes
    _enc: Optional[bytes] = field(default=None, repr=False, compare=False)

    def encode(self) -> bytes:
        if self._enc is None:
            enc = encode_list([encode_uint(self.t), encode_bytes(self.instance_id.encode()),
                               encode_bytes(self.sig)])
            object.__setattr__(self, "_enc", enc)
        return self._enc  # type: ignore[return-value]

    @classmethod
    def read(cls, r: Reader) -> "Timestamp":
        start = r.pos
        fields = r.list(Reader.bytes)
        if len(fields) != 3 or len(fields[0]) != 8:
            raise DecodingError("malformed timestamp")
        return cls(int.from_bytes(fields[0], "big"), _decode_id(fields[1]), fields[2],
                   bytes(r.buf[start:r.pos]))

    @classmethod
    def decode(cls, buf: bytes) -> "Timestamp":
        return decode_all(buf, cls.read)


def _decode_id(raw: bytes) -> str:
    try:
        return raw.decode()
    except UnicodeDecodeError as exc:
        raise DecodingError("instance id is not UTF-8") from exc


def _opt(value) -> bytes:
    if value is None:
        return b"\x00" + encode_bytes(b"")
    return b"\x01" + encode_bytes(value.encode())


def _read_opt(r: Reader, cls):
    flag = r.byte()
    payload = r.bytes()
    if flag == 0:
        if payload:
            raise DecodingError("absent field with payload")
        return None
    if flag != 1:
        raise DecodingError(f"bad presence flag {flag}")
    return cls.decode(payload)


@dataclass(frozen=True)
class EvidenceEntry:
    """One ``(op, c, d, ts)`` element of an evidence chain; ``None`` stands for an absent field."""

    op: Optional[Op]
    c: Optional[Commitment] = None
    d: Optional[Decommitment] = None
    ts: Optional[Timestamp] = None
    _enc: Optional[bytes] = field(default=None, repr=False, compare=False)

    def encode(self) -> bytes:
        if self._enc is None:
            op_byte = NO_OP_BYTE if self.op is None else int(self.op)
            enc = bytes([op_byte]) + _opt(self.c) + _opt(self.d) + _opt(self.ts)
            object.__setattr__(self, "_enc", enc)
        return self._enc  # type: ignore[return-value]

    def with_ts(self, ts: Optional[Timestamp]) -> "EvidenceEntry":
        return EvidenceEntry(self.op, self.c, self.d, ts)

    @classmethod
    def read(cls, r: Reader) -> "EvidenceEntry":
        start = r.pos
        op_byte = r.byte()
        if op_byte == NO_OP_BYTE:
            op = None
        else:
            try:
                op = Op(op_byte)
            except ValueError:
                raise DecodingError(f"unknown op byte {op_byte}") from None
        c = _read_opt(r, Commitment)
        d = _read_opt(r, Decommitment)
        ts = _read_opt(r, Timestamp)
        return cls(op, c, d, ts, bytes(r.buf[start:r.pos]))

    @classmethod
    def decode(cls, buf: bytes) -> "EvidenceEntry":
        return decode_all(buf, cls.read)

    def __repr__(self) -> str:
        t = None if self.ts is None else self.ts.t
        return f"EvidenceEntry({op_name(self.op)}, c={self.c is not None}, d={self.d is not None}, t={t})"
