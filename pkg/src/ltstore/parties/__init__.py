"""Client, evidence service, timestamp service and shareholders over a simulated network."""

from .client import AccessError, Client, StorageFault
from .config import PRESETS, STANDARD_INSTANCES, ConfigError, InstanceSpec, SystemConfig, load_config, preset
from .network import NetLedger
from .schedule import Clock, ClockError, Event, Schedule
from .services import EvidenceService, Shareholder, TimestampService
from .system import System

__all__ = [
    "AccessError", "Client", "Clock", "ClockError", "ConfigError", "Event", "EvidenceService",
    "InstanceSpec", "NetLedger", "PRESETS", "STANDARD_INSTANCES", "Schedule", "Shareholder",
    "StorageFault", "System", "SystemConfig", "TimestampService", "load_config", "preset",
]
