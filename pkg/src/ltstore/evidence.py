"""Evidence chains: merging, commitment refresh, and integrity verification.

An evidence block is a list of :class:`~ltstore.records.EvidenceEntry`.
The shareholders hold the long history; the evidence service holds only the
newest commitment of each slot, its timestamp, and any timestamp renewals
made since. On every access the client folds the service's part into the
shareholder part (:func:`merge_es_evidence`) and, for blocks it only moves,
adds a fresh commitment to the newest (commitment, timestamp) pair
(:func:`refresh_commit`) so moved blocks cannot be linked by the service.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .codec import Reader, decode_all, encode_bytes, encode_list
from .crypto import TrustAnchor, commit, ver_com, ver_ts
from .crypto.instances import SchemeInstance
from .records import Commitment, EvidenceEntry, Op, Timestamp, op_name
from .rng import Rng

EvidenceBlock = list  # list[EvidenceEntry]

__all__ = [
    "ConsistencyError", "EvidenceBlock", "TrustAnchor", "VerifyReport", "decode_block",
    "encode_block", "merge_es_evidence", "prev_message", "recom_message", "refresh_commit",
    "verify_int", "verify_report",
]


class ConsistencyError(ValueError):
    """Evidence from the evidence service does not continue the shareholder chain."""


def encode_block(E: Sequence[EvidenceEntry]) -> bytes:
    return encode_list(e.encode() for e in E)


def decode_block(buf: bytes) -> list[EvidenceEntry]:
    return decode_all(buf, lambda r: r.list(EvidenceEntry.read))


def read_block(r: Reader) -> list[EvidenceEntry]:
    return r.list(EvidenceEntry.read)


def prev_message(c: Commitment, ts: Timestamp) -> bytes:
    """Message committed to by Read and ReTs entries: the pair ``[c, ts]``."""
    return encode_list([c.encode(), ts.encode()])


def recom_message(dat: bytes, E: Sequence[EvidenceEntry]) -> bytes:
    """Message committed to by ReCom entries: the pair ``[dat, E]``."""
    return encode_list([encode_bytes(dat), encode_block(E)])


def merge_es_evidence(E: Sequence[EvidenceEntry], E_ES: Sequence[EvidenceEntry]) -> list[EvidenceEntry]:
    if not E:
        raise ConsistencyError("shareholder evidence is empty")
    if not E_ES:
        raise ConsistencyError("evidence-service evidence is empty")
    head = E_ES[0]
    if head.op is not None or head.c is None or head.ts is None:
        raise ConsistencyError("evidence-service head is not a stamped commitment")
    if E[-1].ts is not None:
        raise ConsistencyError("shareholder chain has no pending timestamp")
    if head.c != E[-1].c:
        raise ConsistencyError("evidence-service commitment does not match the chain")
    for e in E_ES[1:]:
        if e.op is not Op.RETS:
            raise ConsistencyError(f"unexpected {op_name(e.op)} entry from the evidence service")
    out = list(E[:-1])
    out.append(E[-1].with_ts(head.ts))
    out.extend(E_ES[1:])
    return out


def refresh_commit(E: Sequence[EvidenceEntry], csi: SchemeInstance, rng: Rng) -> list[EvidenceEntry]:
    if not E:
        raise ValueError("cannot refresh an empty evidence block")
    out = list(E)
    if out[-1].op is Op.READ:
        # keep at most one ephemeral Read on top of the persistent history
        out.pop()
    last = out[-1]
    if last.c is None or last.ts is None:
        raise ValueError("refresh needs a stamped commitment on top of the chain")
    c, d = commit(csi, prev_message(last.c, last.ts), rng)
    out.append(EvidenceEntry(Op.READ, c, d, None))
    return out


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    index: Optional[int] = None  # 1-based entry index of the first failed assertion
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_report(ta: TrustAnchor, dat: bytes, t: int, E: Sequence[EvidenceEntry],
                  t_ver: int) -> VerifyReport:
    """Integrity verification with a diagnostic for the first failed check."""
    n = len(E)
    if n == 0:
        return VerifyReport(False, None, "empty evidence")
    for i, e in enumerate(E, 1):
        if e.c is None or e.d is None or e.ts is None:
            return VerifyReport(False, i, "missing field")
    times = [e.ts.t for e in E] + [t_ver]  # times[i-1] = t_i, times[n] = t_{n+1}
    # t_NRC(i): first ReCom time strictly after i, else t_ver
    nrc = [0] * n
    nxt = t_ver
    for j in range(n - 1, -1, -1):
        nrc[j] = nxt
        if E[j].op is Op.RECOM:
            nxt = min(nxt, times[j])

    for i in range(n, 0, -1):
        e = E[i - 1]
        if not ver_ts(ta, e.c.encode(), e.ts, times[i]):
            return VerifyReport(False, i, "timestamp invalid")
        if e.op is Op.WRITE and i == 1:
            m = dat
        elif e.op in (Op.READ, Op.RETS) and i > 1:
            p = E[i - 2]
            m = prev_message(p.c, p.ts)
        elif e.op is Op.RECOM and i > 1:
            m = recom_message(dat, E[: i - 1])
        else:
            return VerifyReport(False, i, f"{op_name(e.op)} entry not allowed at position {i}")
        if not ver_com(ta, m, e.c, e.d, nrc[i - 1]):
            return VerifyReport(False, i, "commitment invalid")
    if E[0].ts.t != t:
        return VerifyReport(False, 1, "claimed time differs from first timestamp")
    return VerifyReport(True)


def verify_int(ta: TrustAnchor, dat: bytes, t: int, E: Sequence[EvidenceEntry], t_ver: int) -> bool:
    return verify_report(ta, dat, t, E, t_ver).ok
