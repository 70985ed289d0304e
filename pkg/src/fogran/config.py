"""Network configuration: defaults, INI parsing and conversion to chains.

INI schema (all keys optional)::

    [network]
    k = 2
    d_e = 2              ; scheduling delay, slots
    d_c = 0              ; fronthaul delay, slots
    eps = 0.0
    gamma_s_db = 5
    gamma_i_db = 0
    velocity_kmh = 100
    carrier_hz = 1e9
    slot_s = 1e-4
    n_s = 15
    n_i = 15

    [evaluation]
    splits = D-RAN, C-RAN, F-RAN
    antenna_mode = restricted   ; or full
    mc_samples = 200000
    seed = 0
    fran_exponent = 1/K         ; or 1/K^2
    horizon = 1000000           ; simulated slots, 0 disables simulation
    cache = capacity_cache.jsonl
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .capacity import CapacityOracle
from .fsmc import SPEED_OF_LIGHT, ClarkeParams, MarkovChannelSpec, build_fsmc, db_to_linear, kmh_to_ms
from .scenario import Scenario

SPLITS = ("D-RAN", "C-RAN", "F-RAN", "C-RAN-closed", "F-RAN-closed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkConfig:
    k: int = 2
    d_e: int = 2
    d_c: int = 0
    eps: float = 0.0
    gamma_s_db: float = 5.0
    gamma_i_db: float = 0.0
    velocity_kmh: float = 100.0
    carrier_hz: float = 1e9
    slot_s: float = 1e-4
    n_s: int = 15
    n_i: int = 15
    splits: tuple[str, ...] = ("D-RAN", "C-RAN", "F-RAN")
    antenna_mode: str = "restricted"
    mc_samples: int = 200_000
    seed: int = 0
    fran_exponent: str = "1/K"
    horizon: int = 1_000_000
    cache: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.d_e < 0 or self.d_c < 0:
            raise ConfigError("delays must be non-negative")
        if not 0.0 <= self.eps <= 1.0:
            raise ConfigError(f"eps must lie in [0, 1], got {self.eps}")
        if self.n_s < 1 or self.n_i < 1:
            raise ConfigError("n_s and n_i must be at least 1")
        for name in ("gamma_s_db", "gamma_i_db", "velocity_kmh", "carrier_hz", "slot_s"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.velocity_kmh < 0 or self.carrier_hz <= 0 or self.slot_s <= 0:
            raise ConfigError("velocity must be >= 0; carrier and slot duration must be > 0")
        bad = [s for s in self.splits if s not in SPLITS]
        if bad or not self.splits:
            raise ConfigError(f"unknown splits {bad}; choose from {', '.join(SPLITS)}")
        if self.antenna_mode not in ("restricted", "full"):
            raise ConfigError(f"antenna_mode must be 'restricted' or 'full', got {self.antenna_mode!r}")
        if self.fran_exponent not in ("1/K", "1/K^2"):
            raise ConfigError(f"fran_exponent must be '1/K' or '1/K^2', got {self.fran_exponent!r}")
        if self.mc_samples < 1 or self.horizon < 0:
            raise ConfigError("mc_samples must be positive and horizon non-negative")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def d(self) -> int:
        return self.d_e + self.d_c

    def replace(self, **changes) -> "NetworkConfig":
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def chains(self) -> tuple[MarkovChannelSpec, MarkovChannelSpec]:
        v = kmh_to_ms(self.velocity_kmh)
        direct = build_fsmc(ClarkeParams(db_to_linear(self.gamma_s_db), v, self.wavelength,
                                         self.slot_s, self.n_s), "direct")
        cross = build_fsmc(ClarkeParams(db_to_linear(self.gamma_i_db), v, self.wavelength,
                                        self.slot_s, self.n_i), "cross")
        return direct, cross

    def make_oracle(self) -> CapacityOracle:
        return CapacityOracle(self.k, self.antenna_mode, self.mc_samples, self.seed)

    def scenario(self, oracle: CapacityOracle) -> Scenario:
        direct, cross = self.chains()
        return Scenario(self.k, direct, cross, self.d_e, self.d_c, self.eps, oracle, self.fran_exponent)


_INT = {"k", "d_e", "d_c", "n_s", "n_i", "mc_samples", "seed", "horizon"}
_FLOAT = {"eps", "gamma_s_db", "gamma_i_db", "velocity_kmh", "carrier_hz", "slot_s"}
_STR = {"antenna_mode", "fran_exponent", "cache"}
_SECTIONS = {"network": {"k", "d_e", "d_c", "eps", "gamma_s_db", "gamma_i_db", "velocity_kmh",
                         "carrier_hz", "slot_s", "n_s", "n_i"},
             "evaluation": {"splits", "antenna_mode", "mc_samples", "seed", "fran_exponent",
                            "horizon", "cache"}}


def parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if key in _FLOAT:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    if key == "splits":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if key in _STR:
        return raw
    raise ConfigError(f"unknown key {key!r}")


def load_config(path: str | Path | None = None, **overrides) -> NetworkConfig:
    """Defaults, then the INI file (if any), then keyword overrides that are not None."""
    values = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        for section in parser.sections():
            allowed = _SECTIONS.get(section)
            if allowed is None:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                values[key] = parse_value(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return NetworkConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
