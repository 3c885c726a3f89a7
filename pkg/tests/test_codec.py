from __future__ import annotations

import os
import random

import pytest
from hypothesis import given, strategies as st

from ltstore.codec import (DecodingError, EncodingError, Reader, decode_all, decode_bytes,
                           decode_bytes_list, decode_uint, encode_bytes, encode_list, encode_uint,
                           pad, unpad)


def test_encode_bytes_empty():
    assert encode_bytes(b"") == bytes(8)


def test_encode_bytes_ab():
    assert encode_bytes(b"AB") == bytes(7) + b"\x02" + b"\x41\x42"


def test_encode_list_empty_and_two_empties():
    assert encode_list([]) == bytes(8)
    two = encode_list([encode_bytes(b""), encode_bytes(b"")])
    assert two == (2).to_bytes(8, "big") + bytes(16)


def test_encode_uint_layout():
    assert encode_uint(258) == (8).to_bytes(8, "big") + (258).to_bytes(8, "big")
    assert decode_uint(encode_uint(2 ** 64 - 1)) == 2 ** 64 - 1
    with pytest.raises(EncodingError):
        encode_uint(-1)
    with pytest.raises(EncodingError):
        encode_uint(2 ** 64)


def test_bytes_roundtrip_1000_random():
    rng = random.Random(7)
    for _ in range(1000):
        x = rng.randbytes(rng.randrange(0, 300))
        assert decode_bytes(encode_bytes(x)) == x


def test_list_injectivity_hash_set():
    # 10^4 distinct random lists of byte strings must give 10^4 distinct encodings
    rng = random.Random(11)
    seen_values, seen_enc = set(), set()
    while len(seen_values) < 10_000:
        items = tuple(rng.randbytes(rng.randrange(0, 4)) for _ in range(rng.randrange(0, 4)))
        if items in seen_values:
            continue
        seen_values.add(items)
        seen_enc.add(encode_list(encode_bytes(i) for i in items))
    assert len(seen_enc) == len(seen_values)


@given(st.lists(st.binary(max_size=40), max_size=8))
def test_list_roundtrip(items):
    assert decode_bytes_list(encode_list(encode_bytes(i) for i in items)) == items


@given(st.lists(st.binary(max_size=12), max_size=5), st.lists(st.binary(max_size=12), max_size=5))
def test_list_encoding_injective(a, b):
    ea = encode_list(encode_bytes(i) for i in a)
    eb = encode_list(encode_bytes(i) for i in b)
    assert (ea == eb) == (a == b)


@given(st.binary(max_size=64))
def test_encoding_deterministic(x):
    assert encode_bytes(x) == encode_bytes(bytes(x))


@given(st.binary(max_size=64), st.integers(0, 64))
def test_pad_roundtrip(payload, extra):
    width = len(payload) + extra
    p = pad(payload, width)
    assert len(p) == width + 8
    assert unpad(p) == payload


def test_pad_too_long():
    with pytest.raises(EncodingError):
        pad(b"abc", 2)


def test_unpad_rejects_nonzero_padding():
    p = bytearray(pad(b"abc", 8))
    p[-1] = 1
    with pytest.raises(DecodingError):
        unpad(bytes(p))


@pytest.mark.parametrize("buf", [b"", b"\x00" * 7, (5).to_bytes(8, "big") + b"abc"])
def test_truncated_inputs(buf):
    with pytest.raises(DecodingError):
        decode_bytes(buf)


def test_trailing_bytes_rejected():
    with pytest.raises(DecodingError):
        decode_bytes(encode_bytes(b"x") + b"\x00")


def test_absurd_list_count_rejected():
    with pytest.raises(DecodingError):
        decode_all((2 ** 40).to_bytes(8, "big"), lambda r: r.list(Reader.bytes))


@given(st.binary(max_size=80))
def test_decoder_never_crashes_on_garbage(buf):
    try:
        decode_bytes_list(buf)
    except DecodingError:
        pass


def test_fuzz_random_buffers_only_decoding_errors():
    for _ in range(500):
        buf = os.urandom(random.randrange(0, 40))
        try:
            decode_bytes_list(buf)
        except DecodingError:
            pass
