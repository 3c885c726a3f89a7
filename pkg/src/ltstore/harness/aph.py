"""Access-pattern hiding experiments with scripted distinguishers.

Two games are implemented. The ORAM game gives the adversary the slot pairs
produced by ``gen_ap`` for accesses of its choice and asks it to tell which
of two ids was accessed in the challenge. The full-system game gives it
every byte received by the evidence service and by a chosen set of
shareholders while the client executes accesses (and, optionally, while
the clock runs renewals), then asks which of two instructions was executed.

Distinguishers are small scripted strategies. Each is instantiated afresh
for every trial; ``choose`` may query the oracles and returns the challenge
pair, ``guess`` sees the challenge view and returns 1 or 2.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from math import sqrt
from typing import Callable, Optional, Sequence

from scipy import stats

from ..codec import DecodingError, Reader, decode_all, decode_uint, unpad
from ..oram import OramState, gen_ap, setup
from ..parties.client import decode_payload
from ..parties.config import SystemConfig
from ..parties.network import ES, Message, shareholder
from ..parties.system import System
from ..records import Op
from ..rng import Rng
from ..sharing import Share, reconstruct


@dataclass(frozen=True)
class AphResult:
    name: str
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def sigma(self) -> float:
        return sqrt(0.25 / self.trials)

    def within(self, lo: float = 0.45, hi: float = 0.55) -> bool:
        return lo <= self.rate <= hi


# ====================================================================== ORAM

OramView = tuple[tuple[int, ...], tuple[int, ...]]  # (read slots, write slots)


class OramDistinguisher:
    name = "base"

    def choose(self, client: Callable[[int], OramView], M: int, N: int, rng: Rng) -> tuple[int, int]:
        raise NotImplementedError

    def guess(self, client: Callable[[int], OramView], view: OramView, rng: Rng) -> int:
        raise NotImplementedError


class OramRandomGuess(OramDistinguisher):
    name = "random-guess"

    def choose(self, client, M, N, rng):
        return 1, 2

    def guess(self, client, view, rng):
        return 1 + rng.coin()


class PathEquality(OramDistinguisher):
    """Touch id 1 once, then bet on id 1 iff the challenge re-reads that path."""

    name = "path-equality"

    def choose(self, client, M, N, rng):
        self.seen = set(client(1)[0])
        return 1, 2

    def guess(self, client, view, rng):
        return 1 if set(view[0]) == self.seen else 2


class SlotOverlap(OramDistinguisher):
    """Touch both ids, then bet on the one whose earlier path overlaps the challenge more."""

    name = "slot-overlap"

    def choose(self, client, M, N, rng):
        self.paths = (set(client(1)[0]), set(client(2)[0]))
        return 1, 2

    def guess(self, client, view, rng):
        reads = set(view[0])
        a, b = (len(reads & p) for p in self.paths)
        if a == b:
            return 1 + rng.coin()
        return 1 if a > b else 2


ORAM_DISTINGUISHERS: dict[str, type] = {
    c.name: c for c in (OramRandomGuess, PathEquality, SlotOverlap)
}


def identity_setup(N: int, Z: int = 5) -> tuple[OramState, int]:
    """Deliberately broken control: block ``id`` lives on leaf ``(id - 1) mod leaves`` forever."""
    s, M = setup(N, Rng(0), Z)
    for i in range(1, N + 1):
        s.posmap[i] = (i - 1) % s.leaves
    return s, M


def run_oram_aph(N: int, distinguisher: type, trials: int, seed: int = 0, *,
                 identity: bool = False, Z: int = 5) -> AphResult:
    if trials < 1:
        raise ValueError("need at least one trial")
    master = Rng(("oram-aph", seed, N, distinguisher.name, identity).__repr__())
    wins = 0
    for trial in range(trials):
        orng = master.fork(f"oram/{trial}")
        arng = master.fork(f"adv/{trial}")
        if identity:
            state, M = identity_setup(N, Z)
        else:
            state, M = setup(N, orng, Z)
        box = [state]

        def client(block_id: int) -> OramView:
            ap, box[0] = gen_ap(box[0], block_id, orng, remap=not identity)
            return ap.read_slots, ap.write_slots

        adv = distinguisher()
        id1, id2 = adv.choose(client, M, N, arng)
        if id1 == id2:
            raise ValueError("challenge ids must differ")
        b = 1 + master.fork(f"coin/{trial}").coin()
        view = client(id1 if b == 1 else id2)
        wins += adv.guess(client, view, arng) == b
    tag = f"oram/{distinguisher.name}" + ("/identity" if identity else "")
    return AphResult(tag, trials, wins)


def leaf_uniformity(N: int, accesses: int, seed: int = 0, Z: int = 5, block_id: int = 1) -> float:
    """Chi-square p-value of the leaves read when one id is accessed repeatedly."""
    rng = Rng(("leaf-uniformity", seed, N).__repr__())
    s, _ = setup(N, rng, Z)
    counts = Counter()
    for _ in range(accesses):
        ap, s = gen_ap(s, block_id, rng)
        counts[ap.leaf] += 1
    observed = [counts.get(leaf, 0) for leaf in range(s.leaves)]
    return float(stats.chisquare(observed).pvalue)


# ==================================================================== system

Instruction = tuple[Op, int, Optional[bytes]]


class SystemOracles:
    """Client and Clock oracles handed to the adversary, plus its accumulated view."""

    def __init__(self, sysm: System, observers: Sequence[str]):
        self.sys = sysm
        self.observers = list(observers)
        self.history: list[Message] = sysm.net.view(self.observers)

    def client(self, op: Op, block_id: int, dat: Optional[bytes] = None) -> list[Message]:
        start = self.sys.net.seq
        self.sys.client.access(op, block_id, dat)
        view = self.sys.net.view(self.observers, start)
        self.history.extend(view)
        return view

    def clock(self, years: float) -> list[Message]:
        start = self.sys.net.seq
        self.sys.advance_years(years)
        view = self.sys.net.view(self.observers, start)
        self.history.extend(view)
        return view


def _fields(m: Message) -> list[bytes]:
    return decode_all(m.payload, lambda r: r.list(Reader.bytes))


def es_commitments(view: Sequence[Message]) -> list[tuple[int, bytes]]:
    """``(slot, commitment encoding)`` for every commitment the client stored at the service."""
    out = []
    for m in view:
        if m.dst == ES and m.tag == "es.write":
            f = _fields(m)
            out.append((int.from_bytes(f[0], "big"), f[1]))
    return out


def share_writes(view: Sequence[Message]) -> list[tuple[str, int, bytes]]:
    out = []
    for m in view:
        if m.tag == "sh.write":
            f = _fields(m)
            out.append((m.dst, int.from_bytes(f[0], "big"), f[1]))
    return out


class SystemDistinguisher:
    name = "base"

    def choose(self, o: SystemOracles, cfg: SystemConfig, rng: Rng) -> tuple[Instruction, Instruction]:
        raise NotImplementedError

    def guess(self, o: SystemOracles, view: list[Message], rng: Rng) -> int:
        raise NotImplementedError


class SystemRandomGuess(SystemDistinguisher):
    name = "random-guess"

    def choose(self, o, cfg, rng):
        return (Op.READ, 1, None), (Op.READ, 2, None)

    def guess(self, o, view, rng):
        return 1 + rng.coin()


class FreshCommitment(SystemDistinguisher):
    """Read vs Write of the same id; count commitments the service has never received.

    A Write stores one commitment that was never sent before (the new data's)
    while a Read would only move existing blocks. If moved blocks reuse their
    commitments this count separates the two cases; with refreshed
    commitments every stored commitment is new and the guess is a coin flip.
    """

    name = "fresh-commitment"

    def choose(self, o, cfg, rng):
        o.client(Op.WRITE, 1, bytes(cfg.block_size_L))
        o.client(Op.WRITE, 2, bytes(cfg.block_size_L))
        self.seen = {c for _, c in es_commitments(o.history)}
        return (Op.READ, 1, None), (Op.WRITE, 1, b"\xaa" * cfg.block_size_L)

    def guess(self, o, view, rng):
        fresh = sum(1 for _, c in es_commitments(view) if c not in self.seen)
        if fresh == 0:
            return 1
        if fresh == 1:
            return 2
        return 1 + rng.coin()


class ShareLength(SystemDistinguisher):
    """Write vs Read; a Write with short data would show up as shorter shares if unpadded."""

    name = "share-length"

    def choose(self, o, cfg, rng):
        o.client(Op.WRITE, 2, b"\x01")
        self.baseline = {len(y) for _, _, y in share_writes(o.history[-64:])}
        return (Op.WRITE, 1, b"\x00"), (Op.READ, 2, None)

    def guess(self, o, view, rng):
        lengths = {len(y) for _, _, y in share_writes(view)}
        if len(lengths) > 1:
            return 1
        if lengths and min(lengths) < max(self.baseline, default=0):
            return 1
        return 1 + rng.coin()


class ByteComparison(SystemDistinguisher):
    """Write zeros to id 1 vs ones to id 2, then inspect the observed shares.

    With at least ``k`` observed shareholders the shares are interpolated and
    the decoded data compared directly. Otherwise the strategy compares how
    often the bytes 0x00 and 0xFF appear in the observed shares.
    """

    name = "byte-comparison"

    def choose(self, o, cfg, rng):
        self.k = cfg.threshold_k
        self.L = cfg.block_size_L
        return (Op.WRITE, 1, bytes(self.L)), (Op.WRITE, 2, b"\xff" * self.L)

    def guess(self, o, view, rng):
        writes = share_writes(view)
        by_slot = defaultdict(dict)
        for dst, slot, y in writes:
            by_slot[slot][int(dst[2:])] = y
        holders = {int(dst[2:]) for dst, _, _ in writes}
        if len(holders) >= self.k:
            for slot, ys in sorted(by_slot.items()):
                raw = reconstruct([Share(x, y) for x, y in sorted(ys.items())], self.k)
                if raw is None:
                    continue
                try:
                    dat, _ = decode_payload(unpad(raw))
                except (DecodingError, ValueError):
                    continue
                if dat == bytes(self.L):
                    return 1
                if dat == b"\xff" * self.L:
                    return 2
            return 1 + rng.coin()
        zeros = sum(y.count(0) for _, _, y in writes)
        ones = sum(y.count(0xFF) for _, _, y in writes)
        if zeros == ones:
            return 1 + rng.coin()
        return 1 if zeros > ones else 2


class PathTracking(SystemDistinguisher):
    """Follow id 1 through a Write and a renewal, then look for its slot in the challenge.

    The slot guessed to hold id 1 is the one whose stored commitment had never
    been seen before the Write (picked at random among ties).
    """

    name = "path-tracking"

    def choose(self, o, cfg, rng):
        before = {c for _, c in es_commitments(o.history)}
        view = o.client(Op.WRITE, 1, b"\x42" * cfg.block_size_L)
        fresh = [slot for slot, c in es_commitments(view) if c not in before]
        cands = fresh or [slot for slot, _ in es_commitments(view)]
        self.slot = cands[rng.randbelow(len(cands))]
        o.clock(3)
        return (Op.READ, 1, None), (Op.READ, 2, None)

    def guess(self, o, view, rng):
        reads = {decode_uint(m.payload) for m in view
                 if m.dst == ES and m.tag == "es.read"}
        return 1 if self.slot in reads else 2


SYSTEM_DISTINGUISHERS: dict[str, type] = {
    c.name: c for c in (SystemRandomGuess, FreshCommitment, ShareLength, ByteComparison, PathTracking)
}

APH_CONFIG = SystemConfig(N=2, block_size_L=32, shareholders_n=3, threshold_k=2, horizon_years=10)


def run_system_aph(distinguisher: type, trials: int, *, cfg: SystemConfig = APH_CONFIG,
                   corrupted: Sequence[int] = (1,), seed: int = 0, refresh: bool = True,
                   allow_threshold_violation: bool = False) -> AphResult:
    """Full-system game; the adversary sees the evidence service and ``corrupted`` shareholders."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if len(set(corrupted)) >= cfg.threshold_k and not allow_threshold_violation:
        raise ValueError("corrupting threshold_k or more shareholders is outside the hiding guarantee")
    if any(not (1 <= h <= cfg.shareholders_n) for h in corrupted):
        raise ValueError("corrupted shareholder index out of range")
    observers = [ES] + [shareholder(h) for h in sorted(set(corrupted))]
    master = Rng(("system-aph", seed, distinguisher.name, tuple(corrupted), refresh).__repr__())
    wins = 0
    for trial in range(trials):
        sysm = System.create(cfg.with_(seed=int.from_bytes(master.fork(f"sys/{trial}").bytes(8), "big")),
                             capture=True)
        sysm.client.refresh_enabled = refresh
        arng = master.fork(f"adv/{trial}")
        o = SystemOracles(sysm, observers)
        adv = distinguisher()
        first, second = adv.choose(o, cfg, arng)
        if first == second:
            raise ValueError("challenge instructions must differ")
        b = 1 + master.fork(f"coin/{trial}").coin()
        view = o.client(*(first if b == 1 else second))
        wins += adv.guess(o, view, arng) == b
    tag = f"system/{distinguisher.name}" + ("" if refresh else "/no-refresh")
    if len(set(corrupted)) >= cfg.threshold_k:
        tag += "/threshold-violated"
    return AphResult(tag, trials, wins)
