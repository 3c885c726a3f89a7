"""Byte-wise Shamir secret sharing over GF(256) with proactive resharing.

Every secret byte gets its own random polynomial of degree ``k - 1`` whose
constant term is the byte; shareholder ``i`` receives the evaluations at
``x = i`` for ``i = 1..n``. The field uses the AES reduction polynomial
``x^8 + x^4 + x^3 + x + 1``. Arithmetic is vectorised through a full
256x256 multiplication table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .rng import Rng

AES_POLY = 0x11B


def _gf_mul_slow(a: int, b: int) -> int:
    p = 0
    while b:
        if b & 1:
            p ^= a
        a <<= 1
        if a & 0x100:
            a ^= AES_POLY
        b >>= 1
    return p


def _build_tables():
    mul = np.zeros((256, 256), dtype=np.uint8)
    for a in range(256):
        for b in range(a, 256):
            mul[a, b] = mul[b, a] = _gf_mul_slow(a, b)
    inv = np.zeros(256, dtype=np.uint8)
    for a in range(1, 256):
        inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
    return mul, inv


MUL, INV = _build_tables()


def gf_mul(a: int, b: int) -> int:
    return int(MUL[a, b])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(INV[a])


class SharingError(ValueError):
    pass


@dataclass(frozen=True)
class Share:
    x: int
    y: bytes


@dataclass(frozen=True)
class ShareSet:
    n: int
    k: int
    shares: tuple[Share, ...]


def _check_params(n: int, k: int) -> None:
    if not (1 <= k <= n <= 255):
        raise SharingError(f"need 1 <= k <= n <= 255, got k={k}, n={n}")


def _eval_all(coeffs: np.ndarray, n: int) -> list[np.ndarray]:
    """Evaluate per-byte polynomials (rows = coefficients, constant first) at x = 1..n."""
    out = []
    for x in range(1, n + 1):
        acc = coeffs[-1].copy()
        row = MUL[x]
        for j in range(coeffs.shape[0] - 2, -1, -1):
            acc = row[acc] ^ coeffs[j]
        out.append(acc)
    return out


def share_with_coefficients(secret: bytes, n: int, k: int, coeffs: Sequence[bytes]) -> ShareSet:
    """Deterministic sharing with explicit higher coefficients (``k - 1`` rows)."""
    _check_params(n, k)
    if len(coeffs) != k - 1 or any(len(c) != len(secret) for c in coeffs):
        raise SharingError("need k-1 coefficient rows of the secret's length")
    rows = [np.frombuffer(secret, dtype=np.uint8)] + [np.frombuffer(c, dtype=np.uint8) for c in coeffs]
    mat = np.stack(rows) if rows[0].size else np.zeros((k, 0), dtype=np.uint8)
    ys = _eval_all(mat, n)
    return ShareSet(n, k, tuple(Share(i + 1, y.tobytes()) for i, y in enumerate(ys)))


def share(secret: bytes, n: int, k: int, rng: Rng) -> ShareSet:
    _check_params(n, k)
    coeffs = [rng.bytes(len(secret)) for _ in range(k - 1)]
    return share_with_coefficients(secret, n, k, coeffs)


def lagrange_at_zero(xs: Sequence[int]) -> list[int]:
    """Coefficients ``l_i(0)``; subtraction is xor in characteristic 2."""
    out = []
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if i != j:
                num = gf_mul(num, xj)
                den = gf_mul(den, xi ^ xj)
        out.append(gf_mul(num, gf_inv(den)))
    return out


def reconstruct(shares: Sequence[Share], k: int) -> Optional[bytes]:
    """Interpolate at zero from the first ``k`` shares; ``None`` stands for failure."""
    if k < 1 or len(shares) < k:
        return None
    use = list(shares[:k])
    xs = [s.x for s in use]
    if len(set(xs)) != k or any(not (1 <= x <= 255) for x in xs):
        return None
    length = len(use[0].y)
    if any(len(s.y) != length for s in use):
        return None
    acc = np.zeros(length, dtype=np.uint8)
    for lam, s in zip(lagrange_at_zero(xs), use):
        acc ^= MUL[lam][np.frombuffer(s.y, dtype=np.uint8)]
    return acc.tobytes()


def zero_sharing(length: int, n: int, k: int, rng: Rng) -> list[np.ndarray]:
    """Random degree ``k - 1`` sharing of the all-zero secret."""
    coeffs = np.zeros((k, length), dtype=np.uint8)
    for j in range(1, k):
        coeffs[j] = np.frombuffer(rng.bytes(length), dtype=np.uint8)
    return _eval_all(coeffs, n)


def reshare(old: ShareSet, rng: Rng) -> ShareSet:
    """Every holder deals a zero-sharing; each new share adds all received parts."""
    n, k = old.n, old.k
    if k == 1:
        # degree-0 polynomials: every zero-sharing is identically zero
        return ShareSet(n, k, tuple(Share(s.x, s.y) for s in old.shares))
    length = len(old.shares[0].y)
    acc = [np.frombuffer(s.y, dtype=np.uint8).copy() for s in old.shares]
    for _dealer in range(n):
        parts = zero_sharing(length, n, k, rng)
        for i in range(n):
            acc[i] ^= parts[i]
    return ShareSet(n, k, tuple(Share(s.x, a.tobytes()) for s, a in zip(old.shares, acc)))
