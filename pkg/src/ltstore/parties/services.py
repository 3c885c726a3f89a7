"""Server-side roles: timestamp service, evidence service, shareholders.

Parties talk only through :class:`~ltstore.parties.network.NetLedger`, so
every request and response is a byte string that gets counted (and, when
captured, shown to the access-pattern adversary).
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from ..codec import Reader, decode_all, encode_bytes, encode_list, encode_uint
from ..crypto import COMMITMENT, SIGNATURE, SigningKey, TrustAnchor, commit, stamp
from ..evidence import decode_block, encode_block, prev_message, read_block
from ..records import Commitment, EvidenceEntry, Op, Timestamp
from ..rng import Rng
from ..sharing import zero_sharing
from .network import ES, TS, NetLedger, shareholder
from .schedule import Clock


class SlotError(IndexError):
    pass


def scheme_name(instance_id: str) -> str:
    """Instance ids look like ``NAME`` or ``NAME:fingerprint``."""
    return instance_id.split(":", 1)[0]


def _check_slot(i: int, M: int) -> None:
    if not (1 <= i <= M):
        raise SlotError(f"slot {i} outside 1..{M}")


class TimestampService:
    def __init__(self, ta: TrustAnchor, keys: Sequence[SigningKey], clock: Clock, net: NetLedger):
        self.ta = ta
        self.keys = {k.instance.instance_id: k for k in keys}
        self.clock = clock
        self.net = net
        self.counts: Counter = Counter()

    def request(self, src: str, m: bytes) -> Timestamp:
        """``src`` asks for a timestamp on ``m`` at the current time."""
        self.net.send(src, TS, "ts.request", m)
        inst = self.ta.current(SIGNATURE, self.clock.now)
        ts = stamp(self.keys[inst.instance_id], m, self.clock.now)
        self.counts[f"stamp:{scheme_name(inst.instance_id)}"] += 1
        return Timestamp.decode(self.net.send(TS, src, "ts.response", ts.encode()))

    def encode(self) -> bytes:
        return encode_list(encode_list([encode_bytes(iid.encode()), encode_bytes(k.secret)])
                           for iid, k in sorted(self.keys.items()))

    @staticmethod
    def decode_keys(buf: bytes, ta: TrustAnchor) -> list[SigningKey]:
        rows = decode_all(buf, lambda r: r.list(lambda q: q.list(Reader.bytes)))
        return [SigningKey(ta.get(iid.decode()), sk) for iid, sk in rows]


class EvidenceService:
    """Holds ``E_ES`` per slot: a stamped head commitment plus later ReTs entries."""

    def __init__(self, M: int, ta: TrustAnchor, clock: Clock, net: NetLedger,
                 tss: TimestampService, rng: Rng):
        self.M = M
        self.ta = ta
        self.clock = clock
        self.net = net
        self.tss = tss
        self.rng = rng
        self.slots: list[list[EvidenceEntry]] = [[] for _ in range(M + 1)]
        self.counts: Counter = Counter()

    # request handlers -------------------------------------------------
    def read(self, src: str, i: int) -> list[EvidenceEntry]:
        _check_slot(i, self.M)
        self.net.send(src, ES, "es.read", encode_uint(i))
        return decode_block(self.net.send(ES, src, "es.evidence", encode_block(self.slots[i])))

    def write(self, src: str, i: int, c: Commitment) -> None:
        _check_slot(i, self.M)
        raw = self.net.send(src, ES, "es.write", encode_list([encode_uint(i), encode_bytes(c.encode())]))
        fields = decode_all(raw, lambda r: r.list(Reader.bytes))
        i2, c2 = int.from_bytes(fields[0], "big"), Commitment.decode(fields[1])
        ts = self.tss.request(ES, c2.encode())
        self.slots[i2] = [EvidenceEntry(None, c2, None, ts)]

    # renewal ----------------------------------------------------------
    def renew_ts(self) -> None:
        csi = self.ta.current(COMMITMENT, self.clock.now)
        for i in range(1, self.M + 1):
            E = self.slots[i]
            last = E[-1]
            c, d = commit(csi, prev_message(last.c, last.ts), self.rng)
            self.counts[f"commit:{scheme_name(csi.instance_id)}"] += 1
            ts = self.tss.request(ES, c.encode())
            E.append(EvidenceEntry(Op.RETS, c, d, ts))

    def slot_bytes(self, i: int) -> int:
        return len(encode_block(self.slots[i]))

    # persistence ------------------------------------------------------
    def encode(self) -> bytes:
        return encode_list([encode_uint(self.M),
                            encode_list(encode_block(E) for E in self.slots[1:])])

    def load(self, buf: bytes) -> None:
        def read(r: Reader):
            r._length()
            M = r.uint()
            blocks = r.list(read_block)
            return M, blocks
        M, blocks = decode_all(buf, read)
        if M != self.M or len(blocks) != M:
            raise ValueError("evidence-service state does not match the configured size")
        self.slots = [[]] + blocks


class Shareholder:
    def __init__(self, h: int, M: int, net: NetLedger):
        self.h = h
        self.name = shareholder(h)
        self.M = M
        self.net = net
        self.slots: list[bytes] = [b""] * (M + 1)

    def read(self, src: str, i: int) -> bytes:
        _check_slot(i, self.M)
        self.net.send(src, self.name, "sh.read", encode_uint(i))
        return self.net.send(self.name, src, "sh.share", self.slots[i])

    def write(self, src: str, i: int, y: bytes) -> None:
        _check_slot(i, self.M)
        raw = self.net.send(src, self.name, "sh.write", encode_list([encode_uint(i), encode_bytes(y)]))
        fields = decode_all(raw, lambda r: r.list(Reader.bytes))
        self.slots[int.from_bytes(fields[0], "big")] = fields[1]

    def encode(self) -> bytes:
        return encode_list([encode_uint(self.h), encode_list(encode_bytes(y) for y in self.slots[1:])])

    def load(self, buf: bytes) -> None:
        def read(r: Reader):
            r._length()
            return r.uint(), r.list(Reader.bytes)
        h, ys = decode_all(buf, read)
        if h != self.h or len(ys) != self.M:
            raise ValueError(f"shareholder {self.h} state does not match the configured size")
        self.slots = [b""] + ys


def reshare_all(holders: Sequence[Shareholder], k: int, rngs: Sequence[Rng], net: NetLedger) -> None:
    """Proactive refresh of every slot: each holder deals a zero-sharing to the others."""
    n = len(holders)
    if k == 1 or n == 0:
        return
    M = holders[0].M
    for i in range(1, M + 1):
        length = len(holders[0].slots[i])
        acc = [np.frombuffer(h.slots[i], dtype=np.uint8).copy() for h in holders]
        for d, dealer in enumerate(holders):
            parts = zero_sharing(length, n, k, rngs[d])
            for r, recv in enumerate(holders):
                if r == d:
                    acc[r] ^= parts[r]
                    continue
                raw = net.send(dealer.name, recv.name, "sh.reshare",
                               encode_list([encode_uint(i), encode_bytes(parts[r].tobytes())]))
                fields = decode_all(raw, lambda q: q.list(Reader.bytes))
                acc[r] ^= np.frombuffer(fields[1], dtype=np.uint8)
        for h, a in zip(holders, acc):
            h.slots[i] = a.tobytes()
