"""Flat key=value configuration shared by the CLI and the service.

One file configures everything tunable at run time: controller gains,
safety limits, the pressure policy, loop rates, plant constants, and
service ports. Keys are dotted (`control.kp = 0.08`); any key can also
be overridden through the environment as THERMOHAPTIC_<SECTION>_<FIELD>
(`THERMOHAPTIC_CONTROL_KP=0.1`), which wins over the file. Unknown keys
are rejected loudly; a typo silently ignored would be a tuning session
wasted on the wrong knob.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from .control import (
    DEFAULT_PID_GAINS,
    DEFAULT_PRESSURE_POLICY,
    DEFAULT_SAFETY_LIMITS,
)
from .device.core import DeviceConfig
from .errors import InvalidInputError
from .physics import DEFAULT_COUPLING
from .plant.pneumatic import PneumaticPlantParams
from .plant.thermal import DEFAULT_THERMAL_PARAMS
from .plant.thermistor import ThermistorModel

ENV_PREFIX = "THERMOHAPTIC_"

DEFAULT_UDP_PORT = 9750
DEFAULT_GATEWAY_PORT = 9751


@dataclass(frozen=True)
class ServiceConfig:
    udp_port: int = DEFAULT_UDP_PORT
    gateway_port: int = DEFAULT_GATEWAY_PORT
    clock: str = "realtime"

    def __post_init__(self) -> None:
        # Port 0 asks the OS for an ephemeral port (tests rely on it).
        for name in ("udp_port", "gateway_port"):
            port = getattr(self, name)
            if not (0 <= port < 65536):
                raise InvalidInputError(f"{name} must be in 0..65535")
        parse_clock(self.clock)


def parse_clock(value: str) -> tuple[str, Optional[float]]:
    """'realtime', 'stepped', or 'accel:<factor>' -> (mode, factor)."""
    if value == "realtime":
        return "realtime", None
    if value == "stepped":
        return "stepped", None
    if value.startswith("accel:"):
        try:
            factor = float(value[len("accel:"):])
        except ValueError:
            factor = math.nan
        if not (math.isfinite(factor) and factor > 0.0):
            raise InvalidInputError(f"bad accel factor in clock {value!r}")
        return "accel", factor
    raise InvalidInputError(
        f"clock {value!r} must be realtime, stepped, or accel:<factor>"
    )


@dataclass(frozen=True)
class AppConfig:
    device: DeviceConfig
    service: ServiceConfig
    coupling: object  # CouplingParams; typed loosely to avoid import cycles in hints


# Section name -> default dataclass instance. Every float field of each
# becomes a config key: e.g. control.kp, thermal.skin_temp.
_SECTION_DEFAULTS = {
    "control": DEFAULT_PID_GAINS,
    "limits": DEFAULT_SAFETY_LIMITS,
    "policy": DEFAULT_PRESSURE_POLICY,
    "pneumatic": PneumaticPlantParams(),
    "thermistor": ThermistorModel(),
    "thermal": DEFAULT_THERMAL_PARAMS,
    "coupling": DEFAULT_COUPLING,
}

_RATE_KEYS = {
    "rates.control_hz": "control_rate_hz",
    "rates.sensing_hz": "sensing_rate_hz",
    "rates.telemetry_hz": "telemetry_rate_hz",
}

_SERVICE_KEYS = {
    "service.udp_port": ("udp_port", int),
    "service.gateway_port": ("gateway_port", int),
    "service.clock": ("clock", str),
}


def known_keys() -> set[str]:
    keys = set(_RATE_KEYS) | set(_SERVICE_KEYS)
    for section, default in _SECTION_DEFAULTS.items():
        for field in dataclasses.fields(default):
            keys.add(f"{section}.{field.name}")
    return keys


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat `key = value` lines; '#' starts a comment; blanks ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{source}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise InvalidInputError(f"{source}:{lineno}: empty key or value")
        if key in values:
            raise InvalidInputError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _env_overrides(env: Mapping[str, str]) -> dict[str, str]:
    """THERMOHAPTIC_CONTROL_KP=0.1 -> {'control.kp': '0.1'}.

    The section is the first token after the prefix; the rest of the
    name is the field (fields themselves may contain underscores).
    """
    out: dict[str, str] = {}
    for name, value in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        section, _, field = rest.partition("_")
        if not field:
            raise InvalidInputError(f"malformed override variable {name}")
        out[f"{section}.{field}"] = value
    return out


def _parse_typed(key: str, value: str, target_type: type):
    try:
        if target_type is float:
            parsed = float(value)
            if not math.isfinite(parsed):
                raise ValueError
            return parsed
        if target_type is int:
            return int(value, 10)
        return value
    except ValueError:
        raise InvalidInputError(
            f"config key {key}: cannot parse {value!r} as {target_type.__name__}"
        ) from None


def build_app_config(values: Mapping[str, str]) -> AppConfig:
    valid = known_keys()
    unknown = sorted(set(values) - valid)
    if unknown:
        raise InvalidInputError(f"unknown config keys: {', '.join(unknown)}")

    sections = {name: default for name, default in _SECTION_DEFAULTS.items()}
    rate_kwargs: dict[str, float] = {}
    service_kwargs: dict[str, object] = {}

    for key, raw in values.items():
        if key in _RATE_KEYS:
            rate_kwargs[_RATE_KEYS[key]] = _parse_typed(key, raw, float)
            continue
        if key in _SERVICE_KEYS:
            field, typ = _SERVICE_KEYS[key]
            service_kwargs[field] = _parse_typed(key, raw, typ)
            continue
        section, _, field = key.partition(".")
        default = sections[section]
        current = getattr(default, field)
        parsed = _parse_typed(key, raw, type(current))
        sections[section] = dataclasses.replace(default, **{field: parsed})

    device = DeviceConfig(
        thermal=sections["thermal"],
        pneumatic=sections["pneumatic"],
        gains=sections["control"],
        limits=sections["limits"],
        policy=sections["policy"],
        thermistor=sections["thermistor"],
        **rate_kwargs,
    )
    return AppConfig(
        device=device,
        service=ServiceConfig(**service_kwargs),
        coupling=sections["coupling"],
    )


def load_config(
    path: Optional[str | Path] = None,
    env: Optional[Mapping[str, str]] = None,
) -> AppConfig:
    values: dict[str, str] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise InvalidInputError(f"config file not found: {p}")
        values.update(parse_config_text(p.read_text(encoding="utf-8"), str(p)))
    values.update(_env_overrides(env if env is not None else os.environ))
    return build_app_config(values)
