"""Simulated network: every message is a byte string and every byte is counted."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

AUTHENTICATED = "authenticated"
PRIVATE = "private"

CLIENT = "client"
ES = "es"
TS = "ts"


def shareholder(h: int) -> str:
    return f"sh{h}"


def is_shareholder(party: str) -> bool:
    return party.startswith("sh")


def channel_label(src: str, dst: str) -> str:
    """Shareholder links are private channels; everything else is authenticated."""
    if is_shareholder(src) or is_shareholder(dst):
        return PRIVATE
    return AUTHENTICATED


@dataclass(frozen=True)
class Message:
    seq: int
    src: str
    dst: str
    channel: str
    tag: str
    payload: bytes


class NetLedger:
    """Byte and message counters per ``(src, dst, channel, tag)``.

    With ``capture=True`` the full transcript is kept as well, which is what
    the access-pattern experiments hand to their adversaries.
    """

    def __init__(self, capture: bool = False):
        self.capture = capture
        self.counters: dict[tuple[str, str, str, str], list[int]] = defaultdict(lambda: [0, 0])
        self.transcript: list[Message] = []
        self.seq = 0
        self.total_bytes = 0

    def send(self, src: str, dst: str, tag: str, payload: bytes) -> bytes:
        ch = channel_label(src, dst)
        row = self.counters[(src, dst, ch, tag)]
        row[0] += len(payload)
        row[1] += 1
        self.total_bytes += len(payload)
        if self.capture:
            self.transcript.append(Message(self.seq, src, dst, ch, tag, bytes(payload)))
        self.seq += 1
        return payload

    def party_bytes(self, party: str) -> int:
        """Bytes sent plus bytes received by ``party``."""
        return sum(v[0] for (s, d, _, _), v in self.counters.items() if party in (s, d))

    def bytes_between(self, a: str, b: str) -> int:
        return sum(v[0] for (s, d, _, _), v in self.counters.items() if {s, d} == {a, b})

    def snapshot(self) -> dict[tuple[str, str, str, str], tuple[int, int]]:
        return {k: (v[0], v[1]) for k, v in self.counters.items()}

    def since(self, snap: dict) -> dict[tuple[str, str, str, str], tuple[int, int]]:
        out = {}
        for k, v in self.counters.items():
            b0, m0 = snap.get(k, (0, 0))
            if v[0] != b0 or v[1] != m0:
                out[k] = (v[0] - b0, v[1] - m0)
        return out

    def view(self, observers: Iterable[str], start: int = 0) -> list[Message]:
        """Captured messages received by any of ``observers`` with ``seq >= start``."""
        obs = set(observers)
        return [m for m in self.transcript if m.seq >= start and m.dst in obs]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["src", "dst", "channel", "tag", "bytes", "messages"])
        for (s, d, ch, tag), (b, m) in sorted(self.counters.items()):
            w.writerow([s, d, ch, tag, b, m])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, capture: bool = False) -> "NetLedger":
        led = cls(capture=capture)
        rows = list(csv.reader(io.StringIO(text)))
        for s, d, ch, tag, b, m in rows[1:]:
            led.counters[(s, d, ch, tag)] = [int(b), int(m)]
            led.total_bytes += int(b)
            led.seq += int(m)
        return led


def traffic_of(diff: dict, party: Optional[str] = None) -> int:
    """Sum a :meth:`NetLedger.since` result, optionally only messages touching ``party``."""
    return sum(b for (s, d, _, _), (b, _) in diff.items() if party is None or party in (s, d))
