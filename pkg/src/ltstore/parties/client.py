"""The client: ORAM-driven accesses, commitment renewal, and payload padding."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from ..codec import (EncodingError, Reader, decode_all, encode_bytes, encode_list, encode_uint, pad,
                     unpad)
from ..crypto import COMMITMENT, SIGNATURE, SchemeInstance, TrustAnchor, commit
from ..evidence import (encode_block, merge_es_evidence, prev_message, read_block, recom_message,
                        refresh_commit)
from ..oram import AccessPattern, OramState, gen_ap
from ..records import EvidenceEntry, Op
from ..rng import Rng
from ..sharing import Share, reconstruct, share
from .network import CLIENT
from .schedule import Clock
from .services import EvidenceService, Shareholder, TimestampService, scheme_name


class StorageFault(RuntimeError):
    """Shares could not be reconstructed or decoded."""


class AccessError(ValueError):
    pass


# ------------------------------------------------------------------ sizes

def commitment_size(csi: SchemeInstance) -> int:
    l = csi.hash_bits
    return 8 + (8 + len(csi.instance_id.encode())) + (8 + l // 8) + 2 * (8 + l // 2)


def timestamp_size(sig: SchemeInstance) -> int:
    return 8 + (8 + 8) + (8 + len(sig.instance_id.encode())) + (8 + sig.sig_size)


def entry_size(csi: SchemeInstance, sig: SchemeInstance) -> int:
    """Encoded size of a complete ``(op, c, d, ts)`` entry made under these instances."""
    d = 8 + csi.hash_bits // 2
    return 1 + (9 + commitment_size(csi)) + (9 + d) + (9 + timestamp_size(sig))


@dataclass
class Capacity:
    """Public upper bound on the encoded evidence of any stored block.

    ``tail`` bounds the history accumulated through the last renewal;
    ``access`` is the largest entry an access created since then (0 if none).
    A stored chain is either renewal history or a Write made since the last
    renewal, optionally topped by one Read entry, so
    ``max(tail, access) + access`` bounds it. The bound depends only on the
    schedule and on whether accesses happened, never on which block.
    """

    tail: int = 0
    access: int = 0

    def note_access(self, size: int) -> None:
        self.access = max(self.access, size)

    def note_renewal(self, size: int) -> None:
        self.tail = max(self.tail, self.access) + self.access + size
        self.access = 0

    def evidence_bound(self) -> int:
        return max(self.tail, self.access) + self.access


def encode_payload(dat: bytes, E: Sequence[EvidenceEntry]) -> bytes:
    return encode_list([encode_bytes(dat), encode_block(E)])


def decode_payload(buf: bytes) -> tuple[bytes, list[EvidenceEntry]]:
    def read(r: Reader):
        if r._length() != 2:
            raise EncodingError("payload must have two fields")
        return r.bytes(), r.list(EvidenceEntry.read)
    return decode_all(buf, read)


Block = tuple[bytes, list[EvidenceEntry]]


class Client:
    def __init__(self, cfg, ta: TrustAnchor, clock: Clock, net, es: EvidenceService,
                 holders: Sequence[Shareholder], tss: TimestampService, oram: OramState, rng: Rng):
        self.cfg = cfg
        self.ta = ta
        self.clock = clock
        self.net = net
        self.es = es
        self.holders = list(holders)
        self.tss = tss
        self.oram = oram
        self.rng = rng
        self.stash: dict[int, Block] = {}
        self.cap = Capacity()
        self.refresh_enabled = True  # negative-control switch for the APH harness
        self.counts: Counter = Counter()
        # instrumentation: evidence last stored per slot (bytes, entries); not persisted
        self.stored_evidence = [0] * (oram.M + 1)
        self.stored_entries = [0] * (oram.M + 1)
        self.last_pattern: Optional[AccessPattern] = None

    @property
    def M(self) -> int:
        return self.oram.M

    # instances ----------------------------------------------------------
    def _csi(self) -> SchemeInstance:
        return self.ta.current(COMMITMENT, self.clock.now)

    def current_entry_size(self) -> int:
        now = self.clock.now
        return entry_size(self.ta.current(COMMITMENT, now), self.ta.current(SIGNATURE, now))

    def capacity(self) -> int:
        return 24 + self.cfg.block_size_L + self.cap.evidence_bound()

    def _commit(self, csi: SchemeInstance, m: bytes):
        self.counts[f"commit:{scheme_name(csi.instance_id)}"] += 1
        return commit(csi, m, self.rng)

    def _stamp_pending(self, E: list[EvidenceEntry]) -> list[EvidenceEntry]:
        """Stamp a pending top entry directly; used for blocks that stay in the stash."""
        if E[-1].ts is not None:
            return E
        ts = self.tss.request(CLIENT, E[-1].c.encode())
        return E[:-1] + [E[-1].with_ts(ts)]

    # slot I/O -----------------------------------------------------------
    def read_slot(self, i: int) -> Block:
        E_es = self.es.read(CLIENT, i)
        ys = [Share(h.h, h.read(CLIENT, i)) for h in self.holders]
        raw = reconstruct(ys, self.cfg.threshold_k)
        self.counts["reconstruct"] += 1
        if raw is None:
            raise StorageFault(f"slot {i}: shares do not reconstruct")
        try:
            dat, E = decode_payload(unpad(raw))
        except ValueError as exc:
            raise StorageFault(f"slot {i}: {exc}") from exc
        return dat, merge_es_evidence(E, E_es)

    def write_slot(self, j: int, dat: bytes, E: list[EvidenceEntry]) -> None:
        self.es.write(CLIENT, j, E[-1].c)
        padded = pad(encode_payload(dat, E), self.capacity())
        ss = share(padded, self.cfg.shareholders_n, self.cfg.threshold_k, self.rng)
        self.counts["share"] += 1
        for h, s in zip(self.holders, ss.shares):
            h.write(CLIENT, j, s.y)
        self.stored_evidence[j] = len(encode_block(E))
        self.stored_entries[j] = len(E)

    def _refresh(self, E: list[EvidenceEntry], csi: SchemeInstance) -> list[EvidenceEntry]:
        if not self.refresh_enabled:
            # control: send the old commitment again; the chain is left unstamped
            return E[:-1] + [E[-1].with_ts(None)]
        self.counts[f"commit:{scheme_name(csi.instance_id)}"] += 1
        return refresh_commit(E, csi, self.rng)

    def _new_block(self, csi: SchemeInstance) -> Block:
        dat = self.rng.bytes(self.cfg.block_size_L)
        c, d = self._commit(csi, dat)
        return dat, [EvidenceEntry(Op.WRITE, c, d, None)]

    # setup ----------------------------------------------------------------
    def init_slots(self) -> None:
        """Fill every slot with a dummy block carrying a fresh Write commitment."""
        self.cap = Capacity(tail=self.current_entry_size())
        csi = self._csi()
        for i in range(1, self.M + 1):
            dat, E = self._new_block(csi)
            self.write_slot(i, dat, E)

    # access ---------------------------------------------------------------
    def access(self, op: Op, block_id: int, dat: Optional[bytes] = None) -> Optional[Block]:
        if op is Op.WRITE:
            if dat is None:
                raise AccessError("Write needs data")
            if len(dat) > self.cfg.block_size_L:
                raise AccessError(f"data of {len(dat)} bytes exceeds block size {self.cfg.block_size_L}")
        elif op is Op.READ:
            if dat is not None:
                raise AccessError("Read takes no data")
        else:
            raise AccessError(f"unsupported access operation {op!r}")

        csi = self._csi()
        ap, nxt = gen_ap(self.oram, block_id, self.rng)
        self.last_pattern = ap
        self.cap.note_access(self.current_entry_size())

        loaded: dict[int, Block] = {}
        dummies: list[Block] = []
        for i, rid in zip(ap.read_slots, ap.read_ids):
            blk = self.read_slot(i)
            if rid is None:
                dummies.append(blk)
            else:
                loaded[rid] = blk
        loaded.update(self.stash)
        self.stash = {}
        if ap.fresh:
            # first touch and no dummy on the path: mint a block for the id
            d0, E0 = self._new_block(csi)
            loaded[block_id] = (d0, self._stamp_pending(E0))

        result = None
        if op is Op.WRITE:
            c, d = self._commit(csi, dat)
            loaded[block_id] = (bytes(dat), [EvidenceEntry(Op.WRITE, c, d, None)])
        else:
            d2, E2 = loaded[block_id]
            result = (d2, list(E2))

        for j, wid in zip(ap.write_slots, ap.write_ids):
            if wid is None:
                if dummies:
                    dj, Ej = dummies.pop(0)
                    Ej = self._refresh(Ej, csi)
                else:
                    dj, Ej = self._new_block(csi)
            else:
                dj, Ej = loaded.pop(wid)
                if not (op is Op.WRITE and wid == block_id):
                    Ej = self._refresh(Ej, csi)
            self.write_slot(j, dj, Ej)

        for sid, (ds, Es) in loaded.items():
            self.stash[sid] = (ds, self._stamp_pending(Es))
        if set(self.stash) != set(nxt.stash):
            raise AssertionError("client stash diverged from the ORAM state")
        self.oram = nxt
        return result

    # renewals -------------------------------------------------------------
    def on_renew_ts(self) -> None:
        """Timestamp renewal for stash blocks, which the evidence service never sees."""
        self.cap.note_renewal(self.current_entry_size())
        csi = self._csi()
        for sid, (ds, Es) in sorted(self.stash.items()):
            last = Es[-1]
            c, d = self._commit(csi, prev_message(last.c, last.ts))
            ts = self.tss.request(CLIENT, c.encode())
            self.stash[sid] = (ds, Es + [EvidenceEntry(Op.RETS, c, d, ts)])

    def renew_com(self) -> None:
        self.cap.note_renewal(self.current_entry_size())
        csi = self._csi()
        for i in range(1, self.M + 1):
            dat, E = self.read_slot(i)
            c, d = self._commit(csi, recom_message(dat, E))
            self.write_slot(i, dat, E + [EvidenceEntry(Op.RECOM, c, d, None)])
        for sid, (ds, Es) in sorted(self.stash.items()):
            c, d = self._commit(csi, recom_message(ds, Es))
            self.stash[sid] = (ds, self._stamp_pending(Es + [EvidenceEntry(Op.RECOM, c, d, None)]))

    # persistence ----------------------------------------------------------
    def encode(self) -> bytes:
        stash = encode_list(encode_list([encode_uint(sid), encode_bytes(encode_payload(ds, Es))])
                            for sid, (ds, Es) in sorted(self.stash.items()))
        st = self.rng.state()
        return encode_list([
            encode_bytes(self.oram.encode()), encode_bytes(stash),
            encode_uint(self.cap.tail), encode_uint(self.cap.access),
            encode_bytes(bytes.fromhex(st["key"])), encode_uint(st["pos"]),
            encode_uint(int(st["os_entropy"])),
        ])

    def load(self, buf: bytes) -> None:
        f = decode_all(buf, lambda r: r.list(Reader.bytes))
        if len(f) != 7:
            raise ValueError("malformed client state")
        self.oram = OramState.decode(f[0])
        rows = decode_all(f[1], lambda r: r.list(lambda q: q.list(Reader.bytes)))
        self.stash = {int.from_bytes(sid, "big"): decode_payload(p) for sid, p in rows}
        self.cap = Capacity(int.from_bytes(f[2], "big"), int.from_bytes(f[3], "big"))
        self.rng = Rng(key=f[4], pos=int.from_bytes(f[5], "big"), os_entropy=bool(f[6][-1]))
        self.stored_evidence = [0] * (self.oram.M + 1)
        self.stored_entries = [0] * (self.oram.M + 1)
