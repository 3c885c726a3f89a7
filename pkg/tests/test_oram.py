from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given, strategies as st
from scipy import stats

from ltstore.oram import OramError, OramState, gen_ap, get_id, setup, slot_count, tree_levels
from ltstore.rng import Rng


def check_invariants(s: OramState) -> None:
    placed = [i for i in s.slot_ids[1:] if i]
    assert len(placed) == len(set(placed))
    assert set(placed).isdisjoint(s.stash)
    assert set(placed) | set(s.stash) == s.known
    for slot, bid in enumerate(s.slot_ids):
        if bid:
            # the block sits on the path to its mapped leaf
            assert slot in s.path_slots(s.posmap[bid])


@pytest.mark.parametrize("N,levels,M", [(1, 0, 5), (2, 1, 15), (4, 2, 35), (5, 3, 75), (256, 8, 2555)])
def test_geometry(N, levels, M):
    s, m = setup(N, Rng(0))
    assert tree_levels(N) == levels and m == M == slot_count(N) == s.M


def test_setup_rejects_bad_N():
    with pytest.raises(OramError):
        setup(0, Rng(0))


def test_posmap_uniform_over_setups():
    rng = Rng("posmap")
    counts = Counter()
    for _ in range(10_000):
        s, _ = setup(8, rng)
        counts[s.posmap[1]] += 1
    assert stats.chisquare([counts[i] for i in range(8)]).pvalue > 0.001


def test_path_size_and_shape():
    rng = Rng(1)
    for N in (1, 3, 16, 100):
        s, _ = setup(N, rng)
        for _ in range(30):
            bid = 1 + rng.randbelow(N)
            ap, s2 = gen_ap(s, bid, rng)
            want = s.Z * (s.levels + 1)
            assert len(ap.pairs) == want
            assert sorted(ap.read_slots) == sorted(ap.write_slots) == sorted(s.path_slots(ap.leaf))
            assert ap.leaf == s.posmap[bid] and s2.posmap[bid] == ap.new_leaf
            s = s2


def test_single_bucket_tree():
    s, _ = setup(1, Rng(0))
    ap, _ = gen_ap(s, 1, Rng(1))
    assert ap.read_slots == (1, 2, 3, 4, 5)


def test_gen_ap_does_not_mutate_input():
    s, _ = setup(8, Rng(0))
    before = s.encode()
    gen_ap(s, 3, Rng(1))
    assert s.encode() == before


def test_leaf_uniform_over_10k_accesses():
    rng = Rng("leaves")
    s, _ = setup(16, rng)
    counts = Counter()
    for _ in range(10_000):
        ap, s = gen_ap(s, 1, rng)
        counts[ap.leaf] += 1
    assert stats.chisquare([counts[i] for i in range(s.leaves)]).pvalue > 0.001


def test_get_id_fresh_and_after_first_touch():
    s, M = setup(4, Rng(0))
    assert all(get_id(s, i) is None for i in range(1, M + 1))
    _, s = gen_ap(s, 3, Rng(1))
    hits = [i for i in range(1, M + 1) if get_id(s, i) == 3]
    assert len(hits) + s.stash.count(3) == 1
    assert s.locate(3) in (hits[0] if hits else 0,)
    assert s.locate(2) is None


def test_get_id_range():
    s, M = setup(4, Rng(0))
    with pytest.raises(OramError):
        get_id(s, 0)
    with pytest.raises(OramError):
        get_id(s, M + 1)
    with pytest.raises(OramError):
        gen_ap(s, 5, Rng(0))


def test_shadow_map_1000_accesses():
    rng = Rng("shadow")
    s, M = setup(16, rng)
    shadow = [None] * (M + 1)
    stash = set()
    for _ in range(1000):
        bid = 1 + rng.randbelow(16)
        ap, s = gen_ap(s, bid, rng)
        for i, rid in zip(ap.read_slots, ap.read_ids):
            # the pattern's view of each read slot matches the shadow (modulo first-touch adoption)
            assert rid == shadow[i] or (i == ap.adopted and shadow[i] is None)
            if rid is not None:
                stash.add(rid)
            shadow[i] = None
        if ap.fresh:
            stash.add(bid)
        for j, wid in zip(ap.write_slots, ap.write_ids):
            shadow[j] = wid
            stash.discard(wid)
        assert all(get_id(s, i) == shadow[i] for i in range(1, M + 1))
        assert stash == set(s.stash)
        check_invariants(s)


def test_read_returns_latest_write_10k_ops():
    """Drive real values through the routing the pattern describes."""
    rng = Rng("correct")
    N = 16
    s, M = setup(N, rng)
    server: dict[int, tuple[int, int]] = {}
    stash: dict[int, int] = {}
    truth: dict[int, int] = {}
    for step in range(10_000):
        bid = 1 + rng.randbelow(N)
        ap, s = gen_ap(s, bid, rng)
        for i, rid in zip(ap.read_slots, ap.read_ids):
            item = server.pop(i, None)
            if item is not None:
                assert item[0] == rid
                stash[rid] = item[1]
            elif rid is not None:
                # first touch adopts a dummy slot: the block starts empty
                assert i == ap.adopted and rid == bid
                stash[rid] = None
        if ap.fresh:
            stash[bid] = None
        if rng.coin():
            truth[bid] = step
            stash[bid] = step
        else:
            assert stash.get(bid, None) == truth.get(bid, None)
        for j, wid in zip(ap.write_slots, ap.write_ids):
            if wid is not None:
                server[j] = (wid, stash.pop(wid))
    assert set(stash) == set(s.stash)


def test_stash_bound_256():
    rng = Rng("stash")
    s, _ = setup(256, rng)
    worst = 0
    for _ in range(100_000):
        _, s = gen_ap(s, 1 + rng.randbelow(256), rng)
        worst = max(worst, len(s.stash))
    assert worst < 64


def test_remap_false_keeps_leaf():
    s, _ = setup(8, Rng(0))
    leaf = s.posmap[2]
    for _ in range(5):
        ap, s = gen_ap(s, 2, Rng(1), remap=False)
        assert ap.leaf == leaf == s.posmap[2]


@given(st.lists(st.integers(1, 9), min_size=1, max_size=40), st.integers(0, 2 ** 32))
def test_property_invariants_and_encoding(ops, seed):
    rng = Rng(seed)
    s, _ = setup(9, rng)
    for bid in ops:
        _, s = gen_ap(s, bid, rng)
        check_invariants(s)
    back = OramState.decode(s.encode())
    assert back == s
