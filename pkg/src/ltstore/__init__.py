"""Confidential long-term storage with renewable integrity evidence.

Data blocks are secret-shared across shareholders and placed with Path
ORAM; each block carries an evidence chain of commitments and timestamps
that is renewed before the underlying schemes expire.
"""

from .evidence import VerifyReport, verify_int, verify_report
from .parties import System, SystemConfig, load_config, preset
from .records import Commitment, Decommitment, EvidenceEntry, Op, Timestamp

__version__ = "0.1.0"

__all__ = [
    "Commitment", "Decommitment", "EvidenceEntry", "Op", "System", "SystemConfig", "Timestamp",
    "VerifyReport", "load_config", "preset", "verify_int", "verify_report",
]
