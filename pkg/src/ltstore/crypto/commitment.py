"""Statistically hiding commitments from universal hashing over GF(2^{4l}).

For a digest length ``l`` (224, 256 or 384 bits) the committer hashes the
message to ``x``, draws a random field element ``r`` and a random nonzero
``a``, and publishes ``y = H(r)``, ``a`` and ``b = (x || s) xor a*r`` where
``s`` is ``3l`` random bits. Opening reveals ``r``. Since ``a*r`` is close to
uniform given ``y`` and ``a``, ``b`` hides ``x``; binding rests on the
collision resistance of ``H``.
"""

from __future__ import annotations

import hashlib

from ..records import Commitment, Decommitment
from ..rng import Rng
from . import binfield
from .instances import COMMITMENT, SchemeInstance

_HASHES = {224: hashlib.sha224, 256: hashlib.sha256, 384: hashlib.sha384}


def digest(hash_bits: int, m: bytes) -> bytes:
    return _HASHES[hash_bits](m).digest()


def field_bits(hash_bits: int) -> int:
    return 4 * hash_bits


def _xor(u: bytes, v: bytes) -> bytes:
    return (int.from_bytes(u, "big") ^ int.from_bytes(v, "big")).to_bytes(len(u), "big")


def commit(csi: SchemeInstance, m: bytes, rng: Rng) -> tuple[Commitment, Decommitment]:
    if csi.kind != COMMITMENT:
        raise ValueError(f"{csi.instance_id} is not a commitment instance")
    l = csi.hash_bits
    n = field_bits(l)
    width = n // 8
    x = digest(l, m)
    r = rng.bytes(width)
    while True:
        a = rng.bytes(width)
        if any(a):
            break
    pad = rng.bytes(3 * l // 8)
    ar = binfield.mul_bytes(a, r, n)
    b = _xor(x + pad, ar)
    return Commitment(csi.instance_id, digest(l, r), a, b), Decommitment(r)


def opens_to(csi: SchemeInstance, m: bytes, c: Commitment, d: Decommitment) -> bool:
    """Algebraic check only; validity windows are the caller's business."""
    l = csi.hash_bits
    n = field_bits(l)
    width = n // 8
    if len(d.r) != width or len(c.a) != width or len(c.b) != width or len(c.y) != l // 8:
        return False
    if not any(c.a):
        return False
    if digest(l, d.r) != c.y:
        return False
    ar = binfield.mul_bytes(c.a, d.r, n)
    return _xor(c.b[: l // 8], ar[: l // 8]) == digest(l, m)


def ver_com(ta, m: bytes, c: Commitment, d: Decommitment, t_ref: int) -> bool:
    """True iff ``d`` opens ``c`` to ``m`` and the instance has not expired at ``t_ref``."""
    csi = ta.get(c.instance_id)
    if csi is None or csi.kind != COMMITMENT:
        return False
    if t_ref > csi.t_end:
        return False
    return opens_to(csi, m, c, d)
