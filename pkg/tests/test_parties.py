from __future__ import annotations

import os
from collections import Counter

import pytest

from ltstore.codec import encode_bytes, encode_list, encode_uint
from ltstore.crypto import COMMITMENT, SIGNATURE
from ltstore.evidence import verify_int
from ltstore.parties import (AccessError, ClockError, ConfigError, System, SystemConfig, load_config,
                             preset)
from ltstore.parties.client import commitment_size, entry_size, timestamp_size
from ltstore.parties.network import AUTHENTICATED, PRIVATE, channel_label
from ltstore.parties.schedule import RENEW_COM, RENEW_TS, Schedule
from ltstore.records import Op
from ltstore.rng import Rng

from conftest import TINY


def check_block(sysm, blk):
    dat, E = blk
    return verify_int(sysm.ta, dat, E[0].ts.t, E, sysm.clock.now)


def test_init_inventory(tiny_system):
    s = tiny_system
    assert s.M == 35
    for i in range(1, s.M + 1):
        assert len(s.es.slots[i]) == 1 and s.es.slots[i][0].op is None
        lens = {len(h.slots[i]) for h in s.holders}
        assert len(lens) == 1 and lens.pop() > TINY.block_size_L
    assert not s.client.stash
    assert all(rep.ok for _, rep in s.verify_all())


def test_init_traffic_matches_arithmetic():
    s = System.create(TINY)
    csi = s.ta.current(COMMITMENT, 0)
    sig = s.ta.current(SIGNATURE, 0)
    cs, tsz = commitment_size(csi), timestamp_size(sig)
    share_len = 8 + 24 + TINY.block_size_L + entry_size(csi, sig)
    M, n = s.M, TINY.shareholders_n
    got = {k[:2] + (k[3],): v[0] for k, v in s.net.snapshot().items()}
    assert got[("client", "es", "es.write")] == M * (8 + 16 + 8 + cs)
    assert got[("es", "ts", "ts.request")] == M * cs
    assert got[("ts", "es", "ts.response")] == M * tsz
    for h in range(1, n + 1):
        assert got[("client", f"sh{h}", "sh.write")] == M * (8 + 16 + 8 + share_len)
    assert len(got) == 3 + n
    # the formulas agree with actual encodings
    c = s.es.slots[1][0].c
    assert len(c.encode()) == cs and len(s.es.slots[1][0].ts.encode()) == tsz
    assert len(s.holders[0].slots[1]) == share_len


def test_minimal_system():
    s = System.create(SystemConfig(N=1, block_size_L=8, shareholders_n=1, threshold_k=1))
    assert s.M == 5
    s.write(1, b"12345678")
    dat, E = s.read(1)
    assert dat == b"12345678" and check_block(s, (dat, E))


def test_write_read_roundtrip_and_verify(tiny_system):
    s = tiny_system
    rng = Rng("rw")
    truth = {}
    for _ in range(40):
        i = 1 + rng.randbelow(TINY.N)
        if rng.coin():
            truth[i] = rng.bytes(rng.randbelow(TINY.block_size_L + 1))
            s.write(i, truth[i])
        else:
            blk = s.read(i)
            assert check_block(s, blk)
            if i in truth:
                assert blk[0] == truth[i]
                assert blk[1][0].op is Op.WRITE


def test_unwritten_read_returns_verifiable_dummy(tiny_system):
    dat, E = tiny_system.read(2)
    assert len(dat) == TINY.block_size_L
    assert check_block(tiny_system, (dat, E))


def test_access_errors(tiny_system):
    with pytest.raises(AccessError):
        tiny_system.write(1, bytes(TINY.block_size_L + 1))
    with pytest.raises(AccessError):
        tiny_system.client.access(Op.WRITE, 1, None)
    with pytest.raises(AccessError):
        tiny_system.client.access(Op.RECOM, 1)


def test_access_touches_one_path(tiny_system):
    s = tiny_system
    snap = s.net.snapshot()
    s.write(3, b"x")
    diff = s.net.since(snap)
    path = TINY.bucket_Z * (s.client.oram.levels + 1)
    assert diff[("client", "sh1", PRIVATE, "sh.read")][1] == path
    assert diff[("client", "sh1", PRIVATE, "sh.write")][1] == path
    assert diff[("client", "es", AUTHENTICATED, "es.read")][1] == path
    assert diff[("client", "es", AUTHENTICATED, "es.write")][1] == path


def test_write_stamp_time_is_clock(tiny_system):
    s = tiny_system
    s.advance(100)
    s.write(1, b"now")
    dat, E = s.read(1)
    assert E[0].ts.t == 100 and check_block(s, (dat, E))


def test_es_slot_resets_after_access():
    s = System.create(TINY)
    s.renew_ts()
    assert {len(s.es.slots[i]) for i in range(1, s.M + 1)} == {2}
    s.write(1, b"a")
    touched = set(s.client.last_pattern.write_slots)
    for i in range(1, s.M + 1):
        assert len(s.es.slots[i]) == (1 if i in touched else 2)


def test_renew_ts_adds_one_entry_with_es_ts_traffic_only():
    s = System.create(TINY)
    before = [len(s.es.slots[i]) for i in range(1, s.M + 1)]
    snap = s.net.snapshot()
    s.renew_ts()
    after = [len(s.es.slots[i]) for i in range(1, s.M + 1)]
    assert [a - b for a, b in zip(after, before)] == [1] * s.M
    assert {k[:2] for k in s.net.since(snap)} == {("es", "ts"), ("ts", "es")}
    assert all(rep.ok for _, rep in s.verify_all())


def test_renew_com_grows_shareholder_chains():
    s = System.create(TINY)
    s.renew_ts()
    lens = [len(s.audit_slot(i)[1]) for i in range(1, s.M + 1)]
    s.renew_com()
    for i in range(1, s.M + 1):
        assert len(s.es.slots[i]) == 1
        dat, E = s.audit_slot(i)
        assert len(E) == lens[i - 1] + 1 and E[-1].op is Op.RECOM
    assert all(rep.ok for _, rep in s.verify_all())


def test_chains_outlive_their_first_instances():
    s = System.create(TINY.with_(horizon_years=70))
    s.write(1, b"old")
    for decade in range(1, 8):
        s.advance(decade * 3650)
        assert all(rep.ok for _, rep in s.verify_all()), decade
    dat, E = s.read(1)
    hm224 = s.ta.get("HM-224")
    assert hm224.t_end < s.clock.now
    assert E[0].c.instance_id == "HM-224" and dat == b"old"
    assert check_block(s, (dat, E))


def test_reshare_keeps_data_and_uses_private_links_only():
    s = System.create(TINY)
    s.write(2, b"kept")
    old = [list(h.slots) for h in s.holders]
    client_state = s.client.encode()
    snap = s.net.snapshot()
    s.reshare()
    diff = s.net.since(snap)
    assert diff and all(k[0].startswith("sh") and k[1].startswith("sh") and k[2] == PRIVATE
                        for k in diff)
    assert all(old[0][i] != s.holders[0].slots[i] for i in range(1, s.M + 1))
    assert s.client.encode() == client_state
    assert s.read(2)[0] == b"kept"
    assert all(rep.ok for _, rep in s.verify_all())


def test_schedule_counts():
    sch = Schedule(100)
    ten = Counter(e.kind for e in sch.events(0, 3650))
    assert ten == {RENEW_TS: 4, RENEW_COM: 1}
    full = Counter(e.kind for e in sch.events(0, 36500))
    assert full == {RENEW_TS: 40, RENEW_COM: 10}
    assert Schedule(100, reshare_interval_years=5).events(0, 3650)[-1].kind == "Reshare"


def test_clock_advance(tiny_system):
    s = tiny_system
    assert s.advance(1) == []
    done = s.advance(3650)
    assert [e.kind for e in done] == [RENEW_TS] * 4 + [RENEW_COM]
    with pytest.raises(ClockError):
        s.advance(3650)
    with pytest.raises(ClockError):
        s.advance(10)


def test_every_stored_commitment_is_fresh():
    s = System.create(TINY, capture=True)
    rng = Rng("fresh")
    for _ in range(30):
        i = 1 + rng.randbelow(TINY.N)
        s.write(i, b"w") if rng.coin() else s.read(i)
    # skip the list prefix, slot index and byte-string prefix: compare commitments only
    sent = [m.payload[8 + 16 + 8:] for m in s.net.transcript if m.tag == "es.write"]
    assert len(sent) == len(set(sent))


def test_block_conservation(tiny_system):
    s = tiny_system
    rng = Rng("cons")
    touched = set()
    for _ in range(60):
        i = 1 + rng.randbelow(TINY.N)
        touched.add(i)
        s.read(i)
        placed = [b for b in s.client.oram.slot_ids[1:] if b]
        assert sorted(placed + list(s.client.stash)) == sorted(touched)
    assert sum(1 for _ in s.audit_blocks()) == s.M + len(s.client.stash)


def test_save_load_continues_identically(tmp_path):
    a = System.create(TINY)
    a.write(1, b"persist")
    a.advance(800)
    a.save(tmp_path / "a")
    b = System.load(tmp_path / "a")
    for sysm in (a, b):
        sysm.write(2, b"after")
        sysm.read(1)
        sysm.advance(3650)
    a.save(tmp_path / "a2")
    b.save(tmp_path / "b2")
    for name in sorted(os.listdir(tmp_path / "a2")):
        assert (tmp_path / "a2" / name).read_bytes() == (tmp_path / "b2" / name).read_bytes(), name
    assert b.read(1)[0] == b"persist"


def test_config_json_and_presets():
    cfg = TINY.with_(seed=7)
    assert SystemConfig.loads(cfg.dumps()) == cfg
    assert SystemConfig.loads(cfg.dumps()).dumps() == cfg.dumps()
    assert load_config("tiny") == preset("tiny")
    with pytest.raises(ConfigError):
        SystemConfig.from_json({"N": 4, "bogus": 1})
    with pytest.raises(ConfigError):
        preset("nope")
    with pytest.raises(ConfigError):
        SystemConfig(shareholders_n=2, threshold_k=3)


def test_channel_labels():
    assert channel_label("client", "sh1") == PRIVATE
    assert channel_label("sh2", "sh1") == PRIVATE
    assert channel_label("client", "es") == AUTHENTICATED
    assert channel_label("es", "ts") == AUTHENTICATED


def test_es_write_payload_layout():
    s = System.create(TINY, capture=True)
    s.write(1, b"z")
    m = [m for m in s.net.transcript if m.tag == "es.write"][-1]
    i = int.from_bytes(m.payload[16:24], "big")
    c = s.es.slots[i][0].c
    assert m.payload == encode_list([encode_uint(i), encode_bytes(c.encode())])
