"""Signature-based timestamps with pluggable, size-parameterized signatures.

A backend produces a short core signature. It is stretched to the instance's
configured byte length with a deterministic SHAKE-256 tail derived from the
core, so that storage and traffic costs match the scheme being modelled
(e.g. a 9,100-byte hash-based signature) while the security of the core
signature is unchanged: verification recomputes and compares the tail.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from ..codec import encode_list, encode_uint
from ..records import Timestamp
from ..rng import Rng
from .instances import SIGNATURE, SchemeInstance


class StampRefused(ValueError):
    """Raised when an instance is asked to stamp outside its validity window."""


class Ed25519Backend:
    name = "ed25519"
    core_size = 64

    def keygen(self, rng: Rng) -> tuple[bytes, bytes]:
        sk = rng.bytes(32)
        vk = Ed25519PrivateKey.from_private_bytes(sk).public_key().public_bytes(
            Encoding.Raw, PublicFormat.Raw)
        return sk, vk

    def sign(self, sk: bytes, msg: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(sk).sign(msg)

    def verify(self, vk: bytes, msg: bytes, core: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(vk).verify(core, msg)
        except (InvalidSignature, ValueError):
            return False
        return True


BACKENDS = {Ed25519Backend.name: Ed25519Backend()}


def _stretch(core: bytes, size: int) -> bytes:
    if size <= len(core):
        return core
    return core + hashlib.shake_256(b"ltstore/sigpad/" + core).digest(size - len(core))


def signed_message(m: bytes, t: int) -> bytes:
    return encode_list([m, encode_uint(t)])


@dataclass
class SigningKey:
    """Secret half of a signature instance. ``_signer`` is rebuilt lazily."""

    instance: SchemeInstance
    secret: bytes

    def __post_init__(self):
        self._signer = None

    def sign(self, msg: bytes) -> bytes:
        backend = BACKENDS[self.instance.backend]
        if isinstance(backend, Ed25519Backend):
            if self._signer is None:
                self._signer = Ed25519PrivateKey.from_private_bytes(self.secret)
            core = self._signer.sign(msg)
        else:  # pragma: no cover - only one backend ships
            core = backend.sign(self.secret, msg)
        return _stretch(core, self.instance.sig_size)


def _fingerprint(vk: bytes) -> str:
    return hashlib.sha256(vk).hexdigest()[:8]


def ts_setup(name: str, t_start: int, t_end: int, sig_size: int, rng: Rng,
             backend: str = Ed25519Backend.name) -> tuple[SchemeInstance, SigningKey]:
    """Fresh key pair wrapped as a signature instance with a key-derived id."""
    impl = BACKENDS[backend]
    if sig_size < impl.core_size:
        raise ValueError(f"signature size {sig_size} below {backend} core size {impl.core_size}")
    sk, vk = impl.keygen(rng)
    inst = SchemeInstance(f"{name}:{_fingerprint(vk)}", SIGNATURE, t_start, t_end,
                          sig_size=sig_size, backend=backend, verify_key=vk)
    return inst, SigningKey(inst, sk)


def stamp(key: SigningKey, m: bytes, now: int) -> Timestamp:
    inst = key.instance
    if not inst.valid_at(now):
        raise StampRefused(f"{inst.instance_id} cannot stamp at day {now} "
                           f"(valid {inst.t_start}..{inst.t_end})")
    return Timestamp(now, inst.instance_id, key.sign(signed_message(m, now)))


def ver_ts(ta, m: bytes, ts: Timestamp, t_ref: int) -> bool:
    inst = ta.get(ts.instance_id)
    if inst is None or inst.kind != SIGNATURE:
        return False
    if not inst.valid_at(ts.t) or t_ref > inst.t_end:
        return False
    backend = BACKENDS.get(inst.backend)
    if backend is None or len(ts.sig) != max(inst.sig_size, backend.core_size):
        return False
    core = ts.sig[: backend.core_size]
    if _stretch(core, inst.sig_size) != ts.sig:
        return False
    msg = signed_message(m, ts.t)
    memo_key = (inst.instance_id, core)
    h = hashlib.sha256(msg).digest()
    cache = getattr(ta, "sig_cache", None)
    if cache is not None and cache.get(memo_key) == h:
        return True
    ok = backend.verify(inst.verify_key, msg, core)
    if ok and cache is not None:
        cache[memo_key] = h
    return ok
