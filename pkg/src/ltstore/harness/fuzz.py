"""Structured mutations of genuine evidence chains.

A corpus is a list of chains ``(dat, t, E)`` that verify at ``t_ver``.
Each mutation class turns a chain into a different chain; the fuzzer counts
how many mutants ``verify_int`` still accepts. The identity mutation is kept
as a sanity check that the unmodified corpus is accepted.

Relabelling a Read entry as ReTs (or back) is not a mutation class: both
operations commit to the same previous (commitment, timestamp) pair, so the
relabelled chain proves exactly the same facts and acceptance is correct.
Truncating a chain to a genuine prefix is only a forgery once the prefix's
last timestamp has lapsed, which ``stale_prefix`` covers.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..crypto import TrustAnchor
from ..evidence import verify_int
from ..parties.config import SystemConfig
from ..parties.system import System
from ..records import Commitment, Decommitment, EvidenceEntry, Timestamp
from ..rng import Rng

Chain = tuple[bytes, int, list[EvidenceEntry]]


class NoMutation(Exception):
    """The class cannot produce a distinct mutant from this chain."""


def _flip(buf: bytes, rng: Rng) -> bytes:
    if not buf:
        raise NoMutation("empty field")
    pos = rng.randbelow(len(buf) * 8)
    out = bytearray(buf)
    out[pos // 8] ^= 1 << (pos % 8)
    return bytes(out)


def _flip_id(iid: str, rng: Rng) -> str:
    # low 7 bits only, so the id stays ASCII and still encodes
    raw = bytearray(iid.encode())
    j = rng.randbelow(len(raw))
    raw[j] ^= 1 << rng.randbelow(7)
    return raw.decode()


def _pick(E: Sequence[EvidenceEntry], rng: Rng) -> int:
    return rng.randbelow(len(E))


def _replace(E: Sequence[EvidenceEntry], j: int, e: EvidenceEntry) -> list[EvidenceEntry]:
    out = list(E)
    out[j] = e
    return out


@dataclass
class FuzzContext:
    corpus: list[Chain]
    ta: TrustAnchor
    t_ver: int


Mutator = Callable[[Chain, FuzzContext, Rng], Chain]


def m_identity(ch: Chain, ctx: FuzzContext, rng: Rng) -> Chain:
    return ch


def m_flip_dat(ch, ctx, rng):
    dat, t, E = ch
    return _flip(dat, rng) if dat else b"\x00", t, E


def m_flip_c(ch, ctx, rng):
    dat, t, E = ch
    j = _pick(E, rng)
    c = E[j].c
    which = rng.randbelow(4)
    if which == 0:
        c2 = Commitment(_flip_id(c.instance_id, rng), c.y, c.a, c.b)
    elif which == 1:
        c2 = Commitment(c.instance_id, _flip(c.y, rng), c.a, c.b)
    elif which == 2:
        c2 = Commitment(c.instance_id, c.y, _flip(c.a, rng), c.b)
    else:
        c2 = Commitment(c.instance_id, c.y, c.a, _flip(c.b, rng))
    return dat, t, _replace(E, j, EvidenceEntry(E[j].op, c2, E[j].d, E[j].ts))


def m_flip_d(ch, ctx, rng):
    dat, t, E = ch
    j = _pick(E, rng)
    d2 = Decommitment(_flip(E[j].d.r, rng))
    return dat, t, _replace(E, j, EvidenceEntry(E[j].op, E[j].c, d2, E[j].ts))


def m_flip_ts(ch, ctx, rng):
    dat, t, E = ch
    j = _pick(E, rng)
    ts = E[j].ts
    which = rng.randbelow(3)
    if which == 0:
        ts2 = Timestamp(ts.t, ts.instance_id, _flip(ts.sig, rng))
    elif which == 1:
        ts2 = Timestamp(ts.t ^ (1 << rng.randbelow(16)), ts.instance_id, ts.sig)
    else:
        ts2 = Timestamp(ts.t, _flip_id(ts.instance_id, rng), ts.sig)
    return dat, t, _replace(E, j, E[j].with_ts(ts2))


def m_delete(ch, ctx, rng):
    """Drop one entry other than the newest."""
    dat, t, E = ch
    if len(E) < 2:
        raise NoMutation("single-entry chain")
    j = rng.randbelow(len(E) - 1)
    return dat, t, E[:j] + E[j + 1:]


def m_reorder(ch, ctx, rng):
    dat, t, E = ch
    if len(E) < 2:
        raise NoMutation("single-entry chain")
    i = rng.randbelow(len(E))
    j = rng.randbelow(len(E) - 1)
    j += j >= i
    out = list(E)
    out[i], out[j] = out[j], out[i]
    return dat, t, out


def m_time_shift(ch, ctx, rng):
    dat, t, E = ch
    delta = 1 + rng.randbelow(3650)
    if rng.coin():
        delta = -delta
    if t + delta < 0:
        delta = -delta
    return dat, t + delta, E


def _other_chain(ch: Chain, ctx: FuzzContext, rng: Rng) -> Chain:
    for _ in range(64):
        other = ctx.corpus[rng.randbelow(len(ctx.corpus))]
        if other is not ch:
            return other
    raise NoMutation("corpus has a single chain")


def m_transplant(ch, ctx, rng):
    """Replace one entry by an entry taken from another chain."""
    dat, t, E = ch
    other = _other_chain(ch, ctx, rng)[2]
    j = _pick(E, rng)
    e = other[_pick(other, rng)]
    if e.encode() == E[j].encode():
        raise NoMutation("identical entry")
    return dat, t, _replace(E, j, e)


def m_ts_replay(ch, ctx, rng):
    """Attach a genuine timestamp from elsewhere to one entry."""
    dat, t, E = ch
    src = _other_chain(ch, ctx, rng)[2] if rng.coin() else E
    j = _pick(E, rng)
    ts = src[_pick(src, rng)].ts
    if ts.encode() == E[j].ts.encode():
        raise NoMutation("identical timestamp")
    return dat, t, _replace(E, j, E[j].with_ts(ts))


def m_dat_swap(ch, ctx, rng):
    """Claim another chain's evidence for this data (or this evidence for other data)."""
    dat, t, E = ch
    other = _other_chain(ch, ctx, rng)
    if other[0] == dat:
        raise NoMutation("same data")
    return other[0], t, E


def m_stale_prefix(ch, ctx, rng):
    """A genuine prefix whose newest timestamp's instance has expired by ``t_ver``."""
    dat, t, E = ch
    cuts = [j for j in range(1, len(E))
            if ctx.ta.get(E[j - 1].ts.instance_id).t_end < ctx.t_ver]
    if not cuts:
        raise NoMutation("no expired prefix")
    return dat, t, E[: cuts[rng.randbelow(len(cuts))]]


MUTATIONS: dict[str, Mutator] = {
    "flip_dat": m_flip_dat,
    "flip_c": m_flip_c,
    "flip_d": m_flip_d,
    "flip_ts": m_flip_ts,
    "delete": m_delete,
    "reorder": m_reorder,
    "time_shift": m_time_shift,
    "transplant": m_transplant,
    "ts_replay": m_ts_replay,
    "dat_swap": m_dat_swap,
    "stale_prefix": m_stale_prefix,
}


@dataclass
class FuzzReport:
    trials: Counter = field(default_factory=Counter)
    accepted: Counter = field(default_factory=Counter)
    skipped: Counter = field(default_factory=Counter)
    identity_accepted: int = 0
    corpus_size: int = 0

    @property
    def total_accepted(self) -> int:
        return sum(self.accepted.values())

    def rows(self) -> list[dict]:
        return [{"mutation": k, "trials": self.trials[k], "accepted": self.accepted[k],
                 "skipped": self.skipped[k]} for k in sorted(self.trials)]


def integrity_fuzz(corpus: Sequence[Chain], ta: TrustAnchor, t_ver: int, per_class: int = 500,
                   seed: int = 0, classes: Optional[Sequence[str]] = None) -> FuzzReport:
    """Apply ``per_class`` successful mutants of every class and count acceptances.

    A class that cannot produce mutants from the corpus (``stale_prefix`` on a
    history that never outlived an instance, say) ends with fewer trials.
    """
    if not corpus:
        raise ValueError("empty corpus")
    ctx = FuzzContext(list(corpus), ta, t_ver)
    rep = FuzzReport(corpus_size=len(corpus))
    rep.identity_accepted = sum(verify_int(ta, *m_identity(ch, ctx, None), t_ver) for ch in corpus)
    for name in classes or MUTATIONS:
        fn = MUTATIONS[name]
        rng = Rng(f"fuzz/{seed}/{name}")
        attempts = 0
        rep.trials[name] += 0  # list the class even if it never applies
        while rep.trials[name] < per_class:
            attempts += 1
            if attempts > 50 * per_class:
                break  # the class does not apply to this corpus; trials stay short
            ch = ctx.corpus[rng.randbelow(len(ctx.corpus))]
            try:
                dat, t, E = fn(ch, ctx, rng)
            except NoMutation:
                rep.skipped[name] += 1
                continue
            rep.trials[name] += 1
            rep.accepted[name] += verify_int(ta, dat, t, E, t_ver)
    return rep


FUZZ_CONFIG = SystemConfig(N=4, block_size_L=64, horizon_years=25)


def build_corpus(cfg: SystemConfig = FUZZ_CONFIG, years: int = 20, seed: int = 0
                 ) -> tuple[list[Chain], TrustAnchor, int]:
    """Run a small system with a mixed workload and collect every stored chain.

    The history crosses a commitment renewal and the first signature
    instance's expiry, so chains mix Write, Read, ReTs and ReCom entries
    under several instances.
    """
    sysm = System.create(cfg.with_(seed=seed))
    rng = Rng(f"fuzz-corpus/{seed}")
    for i in range(1, cfg.N + 1):
        sysm.write(i, rng.bytes(cfg.block_size_L))
    for _ in range(years):
        sysm.advance_years(1)
        for _ in range(2):
            i = 1 + rng.randbelow(cfg.N)
            if rng.coin():
                sysm.write(i, rng.bytes(cfg.block_size_L))
            else:
                sysm.read(i)
    corpus = []
    for _, dat, E in sysm.audit_blocks():
        corpus.append((dat, E[0].ts.t, E))
    t_ver = sysm.clock.now
    bad = [ch for ch in corpus if not verify_int(sysm.ta, *ch, t_ver)]
    if bad:
        raise AssertionError(f"{len(bad)} genuine chains fail to verify")
    return corpus, sysm.ta, t_ver
