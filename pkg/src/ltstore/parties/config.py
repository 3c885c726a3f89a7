"""System configuration, JSON loading, and the built-in presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from ..crypto.instances import COMMITMENT, SIGNATURE


class ConfigError(ValueError):
    pass


def _year(v) -> float:
    # whole years stay ints so a saved config re-serialises byte for byte
    v = float(v)
    return int(v) if v.is_integer() else v


@dataclass(frozen=True)
class InstanceSpec:
    """One row of the instance calendar. Years are calendar years (start of year)."""

    name: str
    kind: str
    start_year: float
    end_year: float
    hash_bits: int = 0
    sig_size: int = 0

    @classmethod
    def from_json(cls, d: dict) -> "InstanceSpec":
        return cls(d["name"], d["kind"], _year(d["start_year"]), _year(d["end_year"]),
                   int(d.get("hash_bits", 0)), int(d.get("sig_size", 0)))


# Usage periods extend past the first year of the successor so every
# object stamped or committed under an instance can be renewed under the
# next one before the old instance expires.
STANDARD_INSTANCES: tuple[InstanceSpec, ...] = (
    InstanceSpec("RSA-2048", SIGNATURE, 2018, 2033, sig_size=256),
    InstanceSpec("XMSS-256", SIGNATURE, 2031, 2093, sig_size=2500),
    InstanceSpec("XMSS-512", SIGNATURE, 2091, 2119, sig_size=9100),
    InstanceSpec("HM-224", COMMITMENT, 2018, 2077, hash_bits=224),
    InstanceSpec("HM-256", COMMITMENT, 2067, 2101, hash_bits=256),
    InstanceSpec("HM-384", COMMITMENT, 2091, 2119, hash_bits=384),
)


@dataclass(frozen=True)
class SystemConfig:
    N: int = 16
    block_size_L: int = 1024
    shareholders_n: int = 3
    threshold_k: int = 2
    bucket_Z: int = 5
    horizon_years: int = 100
    ts_interval_years: int = 2
    com_interval_years: int = 10
    reshare_interval_years: int = 0  # 0 disables scheduled resharing
    instances: tuple[InstanceSpec, ...] = field(default=STANDARD_INSTANCES)
    seed: int = 0
    os_entropy: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.N < 1:
            raise ConfigError("N must be at least 1")
        if self.block_size_L < 0:
            raise ConfigError("block size must be non-negative")
        if not (1 <= self.threshold_k <= self.shareholders_n <= 255):
            raise ConfigError("need 1 <= threshold_k <= shareholders_n <= 255")
        if self.bucket_Z < 1:
            raise ConfigError("bucket_Z must be positive")
        if self.horizon_years < 1:
            raise ConfigError("horizon must be at least one year")
        for name in ("ts_interval_years", "com_interval_years", "reshare_interval_years"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        kinds = {i.kind for i in self.instances}
        if kinds != {SIGNATURE, COMMITMENT}:
            raise ConfigError("need at least one signature and one commitment instance")
        names = [i.name for i in self.instances]
        if len(set(names)) != len(names):
            raise ConfigError("instance names must be unique")
        for i in self.instances:
            if not i.start_year < i.end_year:
                raise ConfigError(f"{i.name}: empty usage period")

    def to_json(self) -> dict:
        d = asdict(self)
        d["instances"] = [asdict(i) for i in self.instances]
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "SystemConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if "instances" in kw:
            kw["instances"] = tuple(InstanceSpec.from_json(x) for x in kw["instances"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def loads(cls, s: str) -> "SystemConfig":
        return cls.from_json(json.loads(s))

    def with_(self, **kw) -> "SystemConfig":
        return replace(self, **kw)


PRESETS: dict[str, SystemConfig] = {
    # evaluation scale: 100 KB blocks
    "eval-2^8": SystemConfig(N=2 ** 8, block_size_L=100 * 1024),
    "eval-2^12": SystemConfig(N=2 ** 12, block_size_L=100 * 1024),
    "eval-2^16": SystemConfig(N=2 ** 16, block_size_L=100 * 1024),  # long-running
    # desk scale used by the acceptance run
    "desk": SystemConfig(N=2 ** 8, block_size_L=1024),
    "tiny": SystemConfig(N=4, block_size_L=64, horizon_years=20),
}


def preset(name: str) -> SystemConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def load_config(path: Optional[str]) -> SystemConfig:
    if path is None:
        return SystemConfig()
    if path in PRESETS:
        return PRESETS[path]
    with open(path) as fh:
        return SystemConfig.loads(fh.read())
