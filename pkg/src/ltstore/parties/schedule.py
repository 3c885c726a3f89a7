"""Renewal calendar and the simulated clock."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from ..crypto.instances import DAYS_PER_YEAR

RENEW_TS = "ReTs"
RENEW_COM = "ReCom"
RESHARE = "Reshare"

# order of events falling on the same day
_RANK = {RENEW_COM: 0, RENEW_TS: 0, RESHARE: 1}


class ClockError(ValueError):
    pass


class Event(NamedTuple):
    day: int
    kind: str
    year: int  # years since the epoch


@dataclass(frozen=True)
class Schedule:
    horizon_years: int
    ts_interval_years: int = 2
    com_interval_years: int = 10
    reshare_interval_years: int = 0

    @classmethod
    def from_config(cls, cfg) -> "Schedule":
        return cls(cfg.horizon_years, cfg.ts_interval_years, cfg.com_interval_years,
                   cfg.reshare_interval_years)

    def events_in_year(self, y: int) -> list[Event]:
        out = []
        day = y * DAYS_PER_YEAR
        com = self.com_interval_years and y % self.com_interval_years == 0
        ts = self.ts_interval_years and y % self.ts_interval_years == 0
        if com:
            # a commitment renewal stamps fresh commitments, so it stands in for ReTs
            out.append(Event(day, RENEW_COM, y))
        elif ts:
            out.append(Event(day, RENEW_TS, y))
        if self.reshare_interval_years and y % self.reshare_interval_years == 0:
            out.append(Event(day, RESHARE, y))
        return out

    def events(self, after: int, upto: int) -> list[Event]:
        """Events with ``after < day <= upto`` in execution order."""
        if upto <= after:
            return []
        first = max(1, after // DAYS_PER_YEAR)
        last = upto // DAYS_PER_YEAR
        out = []
        for y in range(first, last + 1):
            out.extend(e for e in self.events_in_year(y) if after < e.day <= upto)
        out.sort(key=lambda e: (e.day, _RANK[e.kind]))
        return out


@dataclass
class Clock:
    now: int = 0

    def check_forward(self, t: int) -> None:
        if t <= self.now:
            raise ClockError(f"cannot advance to day {t}: clock is at day {self.now}")
