"""Injectable randomness.

Simulation runs draw from a ChaCha20 keystream keyed by a seed so that every
run is reproducible and the stream position can be saved and restored. The
same interface can be switched to operating-system entropy, standing in for
a physical (information-theoretic) random source.
"""

from __future__ import annotations

import hashlib
import os
from typing import Optional, Union

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

_CHUNK = 1 << 14
_BLOCK = 64

Seed = Union[int, bytes, str]


def _seed_bytes(seed: Seed) -> bytes:
    if isinstance(seed, int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        return seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big")
    if isinstance(seed, str):
        return seed.encode()
    return bytes(seed)


class Rng:
    """Seekable deterministic byte source.

    ``pos`` counts bytes consumed from the keystream, so ``Rng(key=k, pos=p)``
    resumes exactly where a saved generator stopped.
    """

    def __init__(self, seed: Optional[Seed] = None, *, key: Optional[bytes] = None,
                 pos: int = 0, os_entropy: bool = False):
        self.os_entropy = os_entropy
        if key is None:
            if seed is None:
                seed = os.urandom(32)
            key = hashlib.sha256(b"ltstore/rng/" + _seed_bytes(seed)).digest()
        if len(key) != 32:
            raise ValueError("key must be 32 bytes")
        self.key = key
        self.pos = 0
        self._buf = b""
        self._off = 0
        self._seek(pos)

    def _seek(self, pos: int) -> None:
        block, skip = divmod(pos, _BLOCK)
        nonce = block.to_bytes(4, "little") + bytes(12)
        self._enc = Cipher(algorithms.ChaCha20(self.key, nonce), mode=None).encryptor()
        self._buf = self._enc.update(bytes(_CHUNK))
        self._off = skip
        self.pos = pos

    def bytes(self, n: int) -> bytes:
        if n < 0:
            raise ValueError("negative length")
        if self.os_entropy:
            return os.urandom(n)
        out = []
        need = n
        while need:
            avail = len(self._buf) - self._off
            if avail == 0:
                self._buf = self._enc.update(bytes(max(_CHUNK, need)))
                self._off = 0
                continue
            take = min(avail, need)
            out.append(self._buf[self._off:self._off + take])
            self._off += take
            need -= take
        self.pos += n
        return b"".join(out)

    def randbits(self, k: int) -> int:
        if k <= 0:
            return 0
        v = int.from_bytes(self.bytes((k + 7) // 8), "big")
        return v >> (-k % 8)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = (n - 1).bit_length()
        while True:
            v = self.randbits(k)
            if v < n:
                return v

    def coin(self) -> int:
        return self.randbits(1)

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def fork(self, label: str) -> "Rng":
        """Independent child stream; does not advance this one."""
        child = hashlib.sha256(self.key + b"/fork/" + label.encode()).digest()
        return Rng(key=child, os_entropy=self.os_entropy)

    # persistence
    def state(self) -> dict:
        return {"key": self.key.hex(), "pos": self.pos, "os_entropy": self.os_entropy}

    @classmethod
    def from_state(cls, st: dict) -> "Rng":
        return cls(key=bytes.fromhex(st["key"]), pos=int(st["pos"]),
                   os_entropy=bool(st.get("os_entropy", False)))
