"""Wiring of all parties, the renewal clock, auditing, and on-disk state."""

from __future__ import annotations

import json
import os
from typing import Optional

from ..crypto import COMMITMENT, SIGNATURE, SchemeInstance, TrustAnchor, ts_setup, year_to_day
from ..crypto.instances import DAYS_PER_YEAR
from ..evidence import VerifyReport, merge_es_evidence, verify_report
from ..oram import setup as oram_setup
from ..records import Op
from ..rng import Rng
from ..sharing import Share, reconstruct
from ..codec import unpad
from .client import Block, Client, StorageFault, decode_payload
from .config import SystemConfig
from .network import NetLedger
from .schedule import RENEW_COM, RENEW_TS, RESHARE, Clock, Event, Schedule
from .services import EvidenceService, Shareholder, TimestampService, reshare_all

STATE_FILES = ("config.json", "trust_anchor.json", "system.json", "client.bin", "es.bin", "ts.bin",
               "ledger.csv")


def build_trust_anchor(cfg: SystemConfig, rng: Rng):
    ta = TrustAnchor()
    keys = []
    for spec in cfg.instances:
        t0, t1 = year_to_day(spec.start_year), year_to_day(spec.end_year)
        if spec.kind == SIGNATURE:
            inst, key = ts_setup(spec.name, t0, t1, spec.sig_size, rng)
            keys.append(key)
        else:
            inst = SchemeInstance(spec.name, COMMITMENT, t0, t1, hash_bits=spec.hash_bits)
        ta.add(inst)
    return ta, keys


class System:
    """One client, one evidence service, one timestamp service, ``n`` shareholders."""

    def __init__(self, cfg: SystemConfig, *, capture: bool = False, _build: bool = True):
        self.cfg = cfg
        self.schedule = Schedule.from_config(cfg)
        self.clock = Clock(0)
        self.net = NetLedger(capture=capture)
        self.events: list[Event] = []
        if _build:
            master = Rng(cfg.seed, os_entropy=cfg.os_entropy)
            ta, keys = build_trust_anchor(cfg, master.fork("ts"))
            self._wire(ta, keys, master.fork("client"), master.fork("es"),
                       [master.fork(f"sh{h}") for h in range(1, cfg.shareholders_n + 1)])

    def _wire(self, ta, keys, client_rng, es_rng, sh_rngs):
        cfg = self.cfg
        self.ta = ta
        self.tss = TimestampService(ta, keys, self.clock, self.net)
        oram, M = oram_setup(cfg.N, client_rng, cfg.bucket_Z)
        self.M = M
        self.es = EvidenceService(M, ta, self.clock, self.net, self.tss, es_rng)
        self.holders = [Shareholder(h, M, self.net) for h in range(1, cfg.shareholders_n + 1)]
        self.sh_rngs = sh_rngs
        self.client = Client(cfg, ta, self.clock, self.net, self.es, self.holders, self.tss, oram,
                             client_rng)

    @classmethod
    def create(cls, cfg: SystemConfig, *, capture: bool = False) -> "System":
        sysm = cls(cfg, capture=capture)
        sysm.client.init_slots()
        return sysm

    # client operations ------------------------------------------------------
    def write(self, block_id: int, dat: bytes) -> None:
        self.client.access(Op.WRITE, block_id, dat)

    def read(self, block_id: int) -> Block:
        return self.client.access(Op.READ, block_id)

    # renewals and time --------------------------------------------------------
    def renew_ts(self) -> None:
        self.es.renew_ts()
        self.client.on_renew_ts()

    def renew_com(self) -> None:
        self.client.renew_com()

    def reshare(self) -> None:
        reshare_all(self.holders, self.cfg.threshold_k, self.sh_rngs, self.net)

    def run_event(self, e: Event) -> None:
        if e.kind == RENEW_TS:
            self.renew_ts()
        elif e.kind == RENEW_COM:
            self.renew_com()
        elif e.kind == RESHARE:
            self.reshare()
        else:  # pragma: no cover
            raise ValueError(e.kind)
        self.events.append(e)

    def advance(self, t: int, on_event=None) -> list[Event]:
        """Run every scheduled event in ``(now, t]`` in order, then set the clock to ``t``."""
        self.clock.check_forward(t)
        done = []
        for e in self.schedule.events(self.clock.now, t):
            self.clock.now = e.day
            if on_event is not None:
                on_event(e, "pre")
            self.run_event(e)
            if on_event is not None:
                on_event(e, "post")
            done.append(e)
        self.clock.now = t
        return done

    def advance_years(self, years: float, on_event=None) -> list[Event]:
        return self.advance(self.clock.now + round(years * DAYS_PER_YEAR), on_event)

    # auditing (bypasses the network; not part of the protocol) ----------------
    def audit_slot(self, i: int) -> Block:
        ys = [Share(h.h, h.slots[i]) for h in self.holders]
        raw = reconstruct(ys, self.cfg.threshold_k)
        if raw is None:
            raise StorageFault(f"slot {i}: shares do not reconstruct")
        dat, E = decode_payload(unpad(raw))
        return dat, merge_es_evidence(E, self.es.slots[i])

    def audit_blocks(self):
        """Yield ``(where, dat, E)`` for every stored block; ``where`` is a slot or ``stash:id``."""
        for i in range(1, self.M + 1):
            dat, E = self.audit_slot(i)
            yield i, dat, E
        for sid, (dat, E) in sorted(self.client.stash.items()):
            yield f"stash:{sid}", dat, E

    def verify_all(self, t_ver: Optional[int] = None) -> list[tuple[object, VerifyReport]]:
        t_ver = self.clock.now if t_ver is None else t_ver
        out = []
        for where, dat, E in self.audit_blocks():
            t = E[0].ts.t if E and E[0].ts is not None else -1
            out.append((where, verify_report(self.ta, dat, t, E, t_ver)))
        return out

    # persistence --------------------------------------------------------------
    def save(self, path: str) -> None:
        os.makedirs(path, exist_ok=True)

        def put(name: str, data, binary: bool = False) -> None:
            with open(os.path.join(path, name), "wb" if binary else "w") as fh:
                fh.write(data)

        put("config.json", self.cfg.dumps() + "\n")
        put("trust_anchor.json", self.ta.dumps() + "\n")
        meta = {
            "now": self.clock.now,
            "events": [[e.day, e.kind, e.year] for e in self.events],
            "rng": {"es": self.es.rng.state(),
                    **{f"sh{i + 1}": r.state() for i, r in enumerate(self.sh_rngs)}},
        }
        put("system.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
        put("client.bin", self.client.encode(), True)
        put("es.bin", self.es.encode(), True)
        put("ts.bin", self.tss.encode(), True)
        for h in self.holders:
            put(f"{h.name}.bin", h.encode(), True)
        put("ledger.csv", self.net.to_csv())

    @classmethod
    def load(cls, path: str, *, capture: bool = False) -> "System":
        def get(name: str, binary: bool = False):
            with open(os.path.join(path, name), "rb" if binary else "r") as fh:
                return fh.read()

        cfg = SystemConfig.loads(get("config.json"))
        sysm = cls(cfg, capture=capture, _build=False)
        ta = TrustAnchor.loads(get("trust_anchor.json"))
        meta = json.loads(get("system.json"))
        keys = TimestampService.decode_keys(get("ts.bin", True), ta)
        rngs = meta["rng"]
        sysm._wire(ta, keys, Rng(0), Rng.from_state(rngs["es"]),
                   [Rng.from_state(rngs[f"sh{h}"]) for h in range(1, cfg.shareholders_n + 1)])
        sysm.clock.now = int(meta["now"])
        sysm.events = [Event(*e) for e in meta["events"]]
        sysm.client.load(get("client.bin", True))
        sysm.es.load(get("es.bin", True))
        for h in sysm.holders:
            h.load(get(f"{h.name}.bin", True))
        sysm.net = NetLedger.from_csv(get("ledger.csv"), capture=capture)
        for party in (sysm.tss, sysm.es, sysm.client, *sysm.holders):
            party.net = sysm.net
        return sysm
