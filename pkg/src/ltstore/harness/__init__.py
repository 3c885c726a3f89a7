"""Security experiments, integrity fuzzing and long-horizon cost simulation."""

from .aph import (ORAM_DISTINGUISHERS, SYSTEM_DISTINGUISHERS, AphResult, leaf_uniformity,
                  run_oram_aph, run_system_aph)
from .costs import CostReport, random_workload, simulate_schedule
from .fuzz import MUTATIONS, FuzzReport, build_corpus, integrity_fuzz

__all__ = [
    "AphResult", "CostReport", "FuzzReport", "MUTATIONS", "ORAM_DISTINGUISHERS",
    "SYSTEM_DISTINGUISHERS", "build_corpus", "integrity_fuzz", "leaf_uniformity",
    "random_workload", "run_oram_aph", "run_system_aph", "simulate_schedule",
]
