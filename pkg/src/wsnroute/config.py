"""Simulation configuration and the flat ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    """Invalid configuration value; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class Strategy(enum.Enum):
    HE = "he"
    MECRT = "mecrt"
    MINHOP = "minhop"


class TrafficMode(enum.Enum):
    EVENT_POINT = "event_point"
    RANDOM_SOURCE = "random_source"


# Fields that must be strictly positive.
_POSITIVE = (
    "node_count",
    "initial_energy_j",
    "area_width_m",
    "area_height_m",
    "tx_range_m",
    "sense_range_m",
    "data_packet_bits",
    "control_packet_bits",
    "data_rate_bps",
    "bandwidth_bps",
    "e_elec_j_per_bit",
    "eps_amp_j_per_bit_m2",
)


@dataclass(frozen=True)
class SimConfig:
    """Scenario parameters. Defaults reproduce the reference scenario table."""

    node_count: int = 50
    initial_energy_j: float = 0.5
    area_width_m: float = 50.0
    area_height_m: float = 50.0
    tx_range_m: float = 15.0
    sense_range_m: float = 8.0
    bs_x_m: float = 25.0
    bs_y_m: float = 150.0
    data_packet_bits: int = 2000
    control_packet_bits: int = 248
    data_rate_bps: float = 100.0
    bandwidth_bps: float = 5000.0
    seed: int = 0
    max_rounds: int = 100_000
    strategy: Strategy = Strategy.MECRT
    e_elec_j_per_bit: float = 50e-9
    eps_amp_j_per_bit_m2: float = 100e-12
    idle_drain_j_per_round: float = 0.0
    traffic_mode: TrafficMode = TrafficMode.EVENT_POINT
    # 0 disables mobility; otherwise max per-axis displacement per round.
    mobility_step_m: float = 0.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for key in _POSITIVE:
            value = getattr(self, key)
            if not value > 0:
                raise ConfigError(key, f"must be > 0, got {value!r}")
        for key in ("node_count", "data_packet_bits", "control_packet_bits"):
            if int(getattr(self, key)) != getattr(self, key):
                raise ConfigError(key, "must be an integer")
        if self.max_rounds < 0 or int(self.max_rounds) != self.max_rounds:
            raise ConfigError("max_rounds", f"must be a non-negative integer, got {self.max_rounds!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.idle_drain_j_per_round < 0:
            raise ConfigError("idle_drain_j_per_round", "must be >= 0")
        if self.mobility_step_m < 0:
            raise ConfigError("mobility_step_m", "must be >= 0")
        if self.sense_range_m > self.tx_range_m:
            raise ConfigError("sense_range_m", "must not exceed tx_range_m")
        if not isinstance(self.strategy, Strategy):
            raise ConfigError("strategy", f"unknown strategy {self.strategy!r}")
        if not isinstance(self.traffic_mode, TrafficMode):
            raise ConfigError("traffic_mode", f"unknown traffic mode {self.traffic_mode!r}")

    def replace(self, **changes) -> SimConfig:
        return dataclasses.replace(self, **changes)


def _convert(key: str, kind, text: str):
    text = text.strip()
    try:
        if kind is Strategy or kind is TrafficMode:
            return kind(text.lower())
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigError(key, f"invalid value {text!r}") from None
    raise ConfigError(key, "unsupported field type")


_TYPES = {
    "int": int,
    "float": float,
    "Strategy": Strategy,
    "TrafficMode": TrafficMode,
}
FIELD_TYPES = {f.name: _TYPES[f.type] for f in fields(SimConfig)}


def coerce(key: str, text: str):
    """Parse one textual value for config field ``key``."""
    if key not in FIELD_TYPES:
        raise ConfigError(key, "unknown key")
    return _convert(key, FIELD_TYPES[key], text)


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, missing keys keep defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(key, "duplicate key")
        values[key] = coerce(key, value)
    return dataclasses.replace(base or SimConfig(), **values)


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_value(value) -> str:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_items(config: SimConfig) -> list[tuple[str, str]]:
    return [(f.name, format_value(getattr(config, f.name))) for f in fields(config)]


def emit_config(config: SimConfig) -> str:
    return "".join(f"{key} = {value}\n" for key, value in config_items(config))
