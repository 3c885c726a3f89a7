"""Long-horizon cost simulation.

``simulate_schedule`` initializes a system, then steps the clock one year at
a time over the whole horizon. For each year it records storage per slot
just before and just after that year's renewal events, the operations and
network bytes the renewals cost, and optionally the client traffic of one
probe Read compared with a plain ORAM-over-secret-sharing access (same path,
same shares, data only: ``Z * (L_T + 1) * n * 2 * L`` bytes).

Compute cost is reported as operation counts times configurable per-op
constants, so results do not depend on the machine running the simulation.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..crypto.instances import DAYS_PER_YEAR
from ..parties.config import SystemConfig
from ..parties.network import CLIENT, traffic_of
from ..parties.system import System
from ..rng import Rng

OP_KINDS = ("commit", "stamp", "share", "reconstruct")
DEFAULT_OP_COSTS = {k: 1.0 for k in OP_KINDS}

COLUMNS = (
    "year", "events",
    "es_entries_pre", "es_entries_post",
    "es_bytes_pre_mean", "es_bytes_pre_max", "es_bytes_post_mean", "es_bytes_post_max",
    "sh_entries_pre", "sh_entries_post",
    "sh_evidence_pre_mean", "sh_evidence_pre_max", "sh_evidence_post_mean", "sh_evidence_post_max",
    "sh_share_bytes",
    "renewal_commit", "renewal_stamp", "renewal_share", "renewal_reconstruct", "renewal_cost",
    "renewal_net_bytes",
    "probe_client_bytes", "baseline_bytes", "probe_ratio",
)


def op_totals(sysm: System) -> Counter:
    """Operation counts across all parties, folded into :data:`OP_KINDS`."""
    out = Counter()
    for counts in (sysm.client.counts, sysm.es.counts, sysm.tss.counts):
        for key, v in counts.items():
            out[key.split(":", 1)[0]] += v
    return out


def baseline_access_bytes(cfg: SystemConfig, levels: int) -> int:
    """Client traffic of a data-only ORAM access over ``n`` shares: read and write one path."""
    return cfg.bucket_Z * (levels + 1) * cfg.shareholders_n * 2 * cfg.block_size_L


def _stats(values: Sequence[int]) -> tuple[float, int]:
    return (sum(values) / len(values), max(values)) if values else (0.0, 0)


def storage_snapshot(sysm: System) -> dict:
    M = sysm.M
    es_bytes = [sysm.es.slot_bytes(i) for i in range(1, M + 1)]
    es_entries = [len(sysm.es.slots[i]) for i in range(1, M + 1)]
    sh_bytes = sysm.client.stored_evidence[1:]
    sh_entries = sysm.client.stored_entries[1:]
    return {
        "es_entries": max(es_entries),
        "es_bytes": _stats(es_bytes),
        "sh_entries": max(sh_entries),
        "sh_evidence": _stats(sh_bytes),
        "sh_share_bytes": max(len(sysm.holders[0].slots[i]) for i in range(1, M + 1)),
    }


def probe_access(sysm: System, block_id: int = 1) -> int:
    """Client-side bytes (sent and received) of one Read of ``block_id``."""
    snap = sysm.net.snapshot()
    sysm.read(block_id)
    return traffic_of(sysm.net.since(snap), CLIENT)


@dataclass
class CostReport:
    cfg: SystemConfig
    rows: list[dict] = field(default_factory=list)
    year0: dict = field(default_factory=dict)
    verifications: dict = field(default_factory=dict)  # year -> (accepted, total)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(r[k]) for k in COLUMNS})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "config": self.cfg.to_json(),
            "year0": self.year0,
            "rows": self.rows,
            "verifications": {str(y): list(v) for y, v in sorted(self.verifications.items())},
        }, indent=2, sort_keys=True)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


Workload = Callable[[System, int, Rng], None]


def random_workload(accesses_per_year: int) -> Workload:
    """Uniform Reads and Writes over all ids, ``accesses_per_year`` of them each year."""
    def run(sysm: System, year: int, rng: Rng) -> None:
        cfg = sysm.cfg
        for _ in range(accesses_per_year):
            i = 1 + rng.randbelow(cfg.N)
            if rng.coin():
                sysm.write(i, rng.bytes(cfg.block_size_L))
            else:
                sysm.read(i)
    return run


def simulate_schedule(cfg: SystemConfig, *, probe: bool = False, workload: Optional[Workload] = None,
                      verify_years: Sequence[int] = (), op_costs: Optional[dict] = None,
                      on_year: Optional[Callable[[System, int], None]] = None,
                      sysm: Optional[System] = None) -> CostReport:
    """Run the whole horizon and return one row per year ``1..horizon_years``.

    Each year: record storage, run the year's renewal events, record storage
    again, then run the optional workload and the optional probe Read.
    """
    costs = dict(DEFAULT_OP_COSTS)
    costs.update(op_costs or {})
    sysm = sysm or System.create(cfg)
    wl_rng = Rng(cfg.seed).fork("workload")
    rep = CostReport(cfg)
    base = baseline_access_bytes(cfg, sysm.client.oram.levels)
    wanted = set(verify_years)

    def check(year: int) -> None:
        if year in wanted:
            res = sysm.verify_all()
            rep.verifications[year] = (sum(1 for _, r in res if r.ok), len(res))

    check(0)
    if probe:
        b = probe_access(sysm)
        rep.year0 = {"probe_client_bytes": b, "baseline_bytes": base, "probe_ratio": b / base}

    for year in range(1, cfg.horizon_years + 1):
        pre = storage_snapshot(sysm)
        ops0, net0 = op_totals(sysm), sysm.net.total_bytes
        events = sysm.advance(year * DAYS_PER_YEAR)
        ops = op_totals(sysm) - ops0
        post = storage_snapshot(sysm)
        row = {
            "year": year,
            "events": "+".join(e.kind for e in events),
            "es_entries_pre": pre["es_entries"], "es_entries_post": post["es_entries"],
            "es_bytes_pre_mean": pre["es_bytes"][0], "es_bytes_pre_max": pre["es_bytes"][1],
            "es_bytes_post_mean": post["es_bytes"][0], "es_bytes_post_max": post["es_bytes"][1],
            "sh_entries_pre": pre["sh_entries"], "sh_entries_post": post["sh_entries"],
            "sh_evidence_pre_mean": pre["sh_evidence"][0], "sh_evidence_pre_max": pre["sh_evidence"][1],
            "sh_evidence_post_mean": post["sh_evidence"][0],
            "sh_evidence_post_max": post["sh_evidence"][1],
            "sh_share_bytes": post["sh_share_bytes"],
            "renewal_net_bytes": sysm.net.total_bytes - net0,
        }
        for k in OP_KINDS:
            row[f"renewal_{k}"] = ops[k]
        row["renewal_cost"] = sum(ops[k] * costs[k] for k in OP_KINDS)
        if workload is not None:
            workload(sysm, year, wl_rng)
        if probe:
            b = probe_access(sysm)
            row.update(probe_client_bytes=b, baseline_bytes=base, probe_ratio=b / base)
        else:
            row.update(probe_client_bytes=0, baseline_bytes=base, probe_ratio=0.0)
        rep.rows.append(row)
        check(year)
        if on_year is not None:
            on_year(sysm, year)
    return rep
