from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from ltstore.rng import Rng
from ltstore.sharing import (INV, MUL, Share, ShareSet, SharingError, gf_inv, gf_mul, reconstruct,
                             reshare, share, share_with_coefficients)

from oracles import gf256_interpolate_zero, gf256_mul


def test_tables_match_oracle():
    for a in range(256):
        for b in range(0, 256, 7):
            assert MUL[a, b] == gf256_mul(a, b)
    for a in range(1, 256):
        assert gf256_mul(a, int(INV[a])) == 1
    with pytest.raises(ZeroDivisionError):
        gf_inv(0)


def test_frozen_example():
    ss = share_with_coefficients(b"\x2a", 3, 2, [b"\x07"])
    assert [(s.x, s.y) for s in ss.shares] == [(1, b"\x2d"), (2, b"\x24"), (3, b"\x23")]
    assert reconstruct([Share(1, b"\x2d"), Share(3, b"\x23")], 2) == b"\x2a"


def test_frozen_example_by_hand_oracle():
    # f(x) = 0x2A + 0x07 x evaluated with the independent multiply
    assert [0x2A ^ gf256_mul(7, x) for x in (1, 2, 3)] == [0x2D, 0x24, 0x23]
    assert gf256_interpolate_zero([(1, 0x2D), (3, 0x23)]) == 0x2A


def test_k1_every_share_is_secret():
    ss = share(b"secret", 4, 1, Rng(0))
    assert all(s.y == b"secret" for s in ss.shares)


def test_roundtrip_1000_random():
    rng = Rng("rt")
    for i in range(1000):
        n = 1 + rng.randbelow(6)
        k = 1 + rng.randbelow(n)
        secret = rng.bytes(rng.randbelow(40))
        ss = share(secret, n, k, rng)
        assert reconstruct(list(ss.shares), k) == secret


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_all_subsets_reconstruct(n):
    rng = Rng(f"subsets/{n}")
    for k in range(1, n + 1):
        secret = rng.bytes(33)
        ss = share(secret, n, k, rng)
        for subset in combinations(ss.shares, k):
            assert reconstruct(list(subset), k) == secret
        for subset in combinations(ss.shares, k):
            # independent interpolation on the first byte
            assert gf256_interpolate_zero([(s.x, s.y[0]) for s in subset]) == secret[0]
            break


def test_reconstruct_failures():
    ss = share(b"abc", 3, 2, Rng(1))
    s1, s2, _ = ss.shares
    assert reconstruct([s1], 2) is None
    assert reconstruct([s1, s1], 2) is None
    assert reconstruct([s1, Share(2, b"ab")], 2) is None
    assert reconstruct([s1, Share(0, s2.y)], 2) is None


@pytest.mark.parametrize("n,k", [(3, 4), (256, 2), (2, 0)])
def test_parameter_errors(n, k):
    with pytest.raises(SharingError):
        share(b"x", n, k, Rng(0))


@given(st.binary(max_size=50), st.integers(1, 6), st.data())
def test_property_any_k_shares(secret, n, data):
    k = data.draw(st.integers(1, n))
    ss = share(secret, n, k, Rng(len(secret) * 31 + n))
    idx = data.draw(st.permutations(range(n)))
    assert reconstruct([ss.shares[i] for i in idx[:k]], k) == secret


def test_reshare_preserves_secret_1000_rounds():
    rng = Rng("reshare")
    secret = b"long-term secret"
    ss = share(secret, 5, 3, rng)
    for _ in range(1000):
        ss = reshare(ss, rng)
        assert reconstruct(list(ss.shares[1:4]), 3) == secret


def test_reshare_degenerate_identity():
    ss = share(b"s", 1, 1, Rng(0))
    assert reshare(ss, Rng(1)).shares == ss.shares


def test_reshare_single_share_uniform():
    rng = Rng("uniform")
    ss = share(b"\x00", 3, 2, rng)
    vals = []
    for _ in range(10_000):
        ss = reshare(ss, rng)
        vals.append(ss.shares[0].y[0])
    assert stats.chisquare(np.bincount(vals, minlength=256)).pvalue > 0.001


def test_reshare_uncorrelated_with_old():
    rng = Rng("corr")
    old = share(bytes(4096), 3, 2, rng)
    new = reshare(old, rng)
    a = np.frombuffer(old.shares[0].y, np.uint8)
    b = np.frombuffer(new.shares[0].y, np.uint8)
    rate = float(np.mean(a == b))
    # 4096 Bernoulli(1/256) trials: mean 16, sd ~4
    assert abs(rate - 1 / 256) < 5 * np.sqrt(1 / 256 / 4096)


def test_threshold_secrecy_k_minus_one_shares():
    # with k=3 any two shares of s1 and of s2 have the same byte distribution
    rng = Rng("secrecy")
    n_samples = 10_000
    cols = []
    for secret in (b"\x00", b"\xff"):
        vals = []
        for _ in range(n_samples):
            ss = share(secret, 4, 3, rng)
            vals.append((ss.shares[0].y[0], ss.shares[2].y[0]))
        cols.append(np.array(vals))
    for j in range(2):
        table = np.stack([np.bincount(c[:, j], minlength=256) for c in cols])
        assert stats.chi2_contingency(table).pvalue > 0.001


def test_shareset_shape():
    ss = share(b"xyz", 4, 2, Rng(0))
    assert isinstance(ss, ShareSet) and ss.n == 4 and ss.k == 2
    assert [s.x for s in ss.shares] == [1, 2, 3, 4]
    assert {len(s.y) for s in ss.shares} == {3}
    assert gf_mul(3, 7) == gf256_mul(3, 7)
