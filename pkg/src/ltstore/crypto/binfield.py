"""Arithmetic in GF(2^n) for the commitment scheme.

Each field is defined by an irreducible pentanomial
``x^n + x^k1 + x^k2 + x^k3 + 1``. The constants below are the
lexicographically smallest such pentanomials (smallest k1, then k2, then k3)
as found by :func:`is_irreducible`; for n=1024 this coincides with the
widely tabulated choice ``x^1024 + x^19 + x^6 + x + 1``.

Elements travel as big-endian byte strings of ``n // 8`` bytes. The hot path
(carry-less multiply plus reduction) is compiled with numba when available;
a pure-integer implementation is the fallback and the test oracle.
"""

from __future__ import annotations

import numpy as np

PENTANOMIALS: dict[int, tuple[int, int, int]] = {
    896: (7, 5, 3),
    1024: (19, 6, 1),
    1536: (21, 6, 2),
}

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def modulus(n: int) -> int:
    k1, k2, k3 = PENTANOMIALS[n]
    return (1 << n) | (1 << k1) | (1 << k2) | (1 << k3) | 1


# ---------------------------------------------------------------- integers

def clmul_int(a: int, b: int) -> int:
    """Carry-less product of two non-negative integers (4-bit window)."""
    if a == 0 or b == 0:
        return 0
    table = [0] * 16
    for v in range(1, 16):
        t = 0
        for bit in range(4):
            if (v >> bit) & 1:
                t ^= a << bit
        table[v] = t
    out = 0
    shift = 0
    while b:
        nib = b & 15
        if nib:
            out ^= table[nib] << shift
        b >>= 4
        shift += 4
    return out


def reduce_int(p: int, n: int) -> int:
    k1, k2, k3 = PENTANOMIALS[n]
    mask = (1 << n) - 1
    while p >> n:
        h = p >> n
        p = (p & mask) ^ h ^ (h << k1) ^ (h << k2) ^ (h << k3)
    return p


def mul_int(a: int, b: int, n: int) -> int:
    return reduce_int(clmul_int(a, b), n)


def _square_int(a: int) -> int:
    # spreading the bits interleaves zeros, which is squaring over GF(2)
    return int(format(a, "b").translate(_SPREAD), 2) if a else 0


_SPREAD = {ord("0"): "00", ord("1"): "01"}


def _poly_gcd(a: int, b: int) -> int:
    while b:
        db = b.bit_length()
        while a and a.bit_length() >= db:
            a ^= b << (a.bit_length() - db)
        a, b = b, a
    return a


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(n: int, k1: int, k2: int, k3: int) -> bool:
    """Rabin's test for ``x^n + x^k1 + x^k2 + x^k3 + 1`` over GF(2)."""
    f = (1 << n) | (1 << k1) | (1 << k2) | (1 << k3) | 1
    mask = (1 << n) - 1

    def reduce(p: int) -> int:
        while p >> n:
            h = p >> n
            p = (p & mask) ^ h ^ (h << k1) ^ (h << k2) ^ (h << k3)
        return p

    checkpoints = {n // p for p in _prime_factors(n)}
    powers = {}
    cur = 2  # the polynomial x
    for i in range(1, n + 1):
        cur = reduce(_square_int(cur))
        if i in checkpoints:
            powers[i] = cur
    if cur != 2:
        return False
    return all(_poly_gcd(f, powers[i] ^ 2) == 1 for i in checkpoints)


# ------------------------------------------------------------------- limbs

def _mul_limbs_py(a, b, k1, k2, k3):  # pragma: no cover - numba target
    W = a.shape[0]
    table = np.zeros((16, W + 1), dtype=np.uint64)
    for v in range(1, 16):
        for bit in range(4):
            if (v >> bit) & 1:
                carry = np.uint64(0)
                for t in range(W):
                    x = a[t]
                    if bit:
                        table[v, t] ^= (x << np.uint64(bit)) | carry
                        carry = x >> np.uint64(64 - bit)
                    else:
                        table[v, t] ^= x
                table[v, W] ^= carry
    prod = np.zeros(2 * W + 1, dtype=np.uint64)
    for i in range(W):
        w = b[i]
        if w == 0:
            continue
        for j in range(16):
            nib = (w >> np.uint64(4 * j)) & np.uint64(15)
            if nib == 0:
                continue
            row = table[nib]
            sh = 4 * j
            if sh == 0:
                for t in range(W + 1):
                    prod[i + t] ^= row[t]
            else:
                ush = np.uint64(sh)
                back = np.uint64(64 - sh)
                for t in range(W + 1):
                    x = row[t]
                    prod[i + t] ^= x << ush
                    prod[i + t + 1] ^= x >> back
    # fold the high half back with the pentanomial
    acc = np.zeros(W + 1, dtype=np.uint64)
    for t in range(W):
        acc[t] = prod[t] ^ prod[W + t]
    for k in (k1, k2, k3):
        uk = np.uint64(k)
        back = np.uint64(64 - k)
        for t in range(W):
            h = prod[W + t]
            acc[t] ^= h << uk
            acc[t + 1] ^= h >> back
    # the top 2W-th limb of prod is always zero for equal-width inputs
    o = acc[W]
    acc[0] ^= o ^ (o << np.uint64(k1)) ^ (o << np.uint64(k2)) ^ (o << np.uint64(k3))
    return acc[:W].copy()


if HAVE_NUMBA:
    _mul_limbs = numba.njit(cache=True, nogil=True)(_mul_limbs_py)
else:  # pragma: no cover
    _mul_limbs = None


def _to_limbs(x: bytes) -> np.ndarray:
    return np.frombuffer(x, dtype=">u8")[::-1].astype(np.uint64)


def _from_limbs(v: np.ndarray) -> bytes:
    return v[::-1].astype(">u8").tobytes()


def mul_bytes(a: bytes, b: bytes, n: int) -> bytes:
    """Product of two big-endian field elements of ``n // 8`` bytes."""
    width = n // 8
    if len(a) != width or len(b) != width:
        raise ValueError(f"GF(2^{n}) elements are {width} bytes")
    k1, k2, k3 = PENTANOMIALS[n]
    if _mul_limbs is not None:
        return _from_limbs(_mul_limbs(_to_limbs(a), _to_limbs(b), k1, k2, k3))
    p = mul_int(int.from_bytes(a, "big"), int.from_bytes(b, "big"), n)
    return p.to_bytes(width, "big")
