"""Scheme instances, their validity windows, and the trust anchor table."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

SIGNATURE = "signature"
COMMITMENT = "commitment"

EPOCH_YEAR = 2018
DAYS_PER_YEAR = 365


def year_to_day(year: float) -> int:
    """Calendar year (start of) to simulated day number."""
    return round((year - EPOCH_YEAR) * DAYS_PER_YEAR)


def day_to_year(day: int) -> float:
    return EPOCH_YEAR + day / DAYS_PER_YEAR


@dataclass(frozen=True)
class SchemeInstance:
    instance_id: str
    kind: str
    t_start: int
    t_end: int
    hash_bits: int = 0  # commitments: digest length
    sig_size: int = 0  # signatures: total signature bytes
    backend: str = ""
    verify_key: bytes = b""

    def __post_init__(self):
        if self.kind not in (SIGNATURE, COMMITMENT):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if not self.t_start < self.t_end:
            raise ValueError(f"{self.instance_id}: empty validity window")
        if self.kind == COMMITMENT and self.hash_bits not in (224, 256, 384):
            raise ValueError(f"{self.instance_id}: unsupported hash length {self.hash_bits}")

    def valid_at(self, t: int) -> bool:
        return self.t_start <= t <= self.t_end

    def to_json(self) -> dict:
        d = {"instance_id": self.instance_id, "kind": self.kind,
             "t_start": self.t_start, "t_end": self.t_end}
        if self.kind == COMMITMENT:
            d["hash_bits"] = self.hash_bits
        else:
            d.update(sig_size=self.sig_size, backend=self.backend,
                     verify_key=self.verify_key.hex())
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SchemeInstance":
        return cls(d["instance_id"], d["kind"], int(d["t_start"]), int(d["t_end"]),
                   hash_bits=int(d.get("hash_bits", 0)), sig_size=int(d.get("sig_size", 0)),
                   backend=d.get("backend", ""), verify_key=bytes.fromhex(d.get("verify_key", "")))


class TrustAnchor:
    """Instance table consulted by every verifier.

    ``sig_cache`` remembers signatures already checked, mapping
    ``(instance_id, sig)`` to a digest of the signed message. It never turns
    a failure into a success: a hit requires the same message digest.
    """

    def __init__(self, instances: Iterable[SchemeInstance] = ()):
        self.instances = {}
        self.sig_cache = {}
        for inst in instances:
            self.add(inst)

    def add(self, inst: SchemeInstance) -> None:
        if inst.instance_id in self.instances:
            raise ValueError(f"duplicate instance id {inst.instance_id}")
        self.instances[inst.instance_id] = inst

    def get(self, instance_id: str) -> Optional[SchemeInstance]:
        return self.instances.get(instance_id)

    def __contains__(self, instance_id: str) -> bool:
        return instance_id in self.instances

    def of_kind(self, kind: str) -> list[SchemeInstance]:
        return [i for i in self.instances.values() if i.kind == kind]

    def current(self, kind: str, t: int) -> SchemeInstance:
        """The newest instance of ``kind`` valid at ``t`` (latest start wins)."""
        live = [i for i in self.of_kind(kind) if i.valid_at(t)]
        if not live:
            raise LookupError(f"no {kind} instance valid at day {t}")
        return max(live, key=lambda i: (i.t_start, i.instance_id))

    def to_json(self) -> dict:
        return {"instances": [i.to_json() for i in self.instances.values()]}

    @classmethod
    def from_json(cls, d: dict) -> "TrustAnchor":
        return cls(SchemeInstance.from_json(x) for x in d["instances"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, s: str) -> "TrustAnchor":
        return cls.from_json(json.loads(s))
