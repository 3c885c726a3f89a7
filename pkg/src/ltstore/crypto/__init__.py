"""Commitments, timestamps, scheme instances and the trust anchor."""

from .commitment import commit, opens_to, ver_com
from .instances import (COMMITMENT, DAYS_PER_YEAR, EPOCH_YEAR, SIGNATURE, SchemeInstance,
                        TrustAnchor, day_to_year, year_to_day)
from .timestamp import SigningKey, StampRefused, stamp, ts_setup, ver_ts

__all__ = [
    "COMMITMENT", "DAYS_PER_YEAR", "EPOCH_YEAR", "SIGNATURE", "SchemeInstance", "SigningKey",
    "StampRefused", "TrustAnchor", "commit", "day_to_year", "opens_to", "stamp", "ts_setup",
    "ver_com", "ver_ts", "year_to_day",
]
