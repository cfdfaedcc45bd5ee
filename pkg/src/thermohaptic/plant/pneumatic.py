"""First-order model of the proportional valve and tube volume.

A commanded pressure is tracked with a single time constant; the step is
integrated in closed form, so it is exact for any dt and cannot
overshoot.  Commands outside the valve's range are clamped and flagged
rather than rejected: the device keeps running on a bad command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidInputError


@dataclass(frozen=True)
class PneumaticPlantParams:
    pressure_time_constant: float = 0.1  # s
    max_pressure: float = 60.0           # kPa

    def __post_init__(self):
        if not (math.isfinite(self.pressure_time_constant) and self.pressure_time_constant > 0.0):
            raise InvalidInputError("pressure_time_constant must be finite and > 0")
        if not (math.isfinite(self.max_pressure) and self.max_pressure >= 50.0):
            raise InvalidInputError("max_pressure must be finite and >= 50 kPa")


@dataclass(frozen=True)
class PressureStep:
    pressure_kpa: float
    command_clamped: bool


def pressure_step(
    current_kpa: float,
    commanded_kpa: float,
    params: PneumaticPlantParams,
    dt: float,
) -> PressureStep:
    """Advance pouch pressure by dt toward the commanded value.

    Exact first-order response: p' = p + (cmd - p) * (1 - exp(-dt/tau)).
    A command outside [0, max_pressure] is clamped into range and the
    result carries command_clamped=True so the caller can log it.
    """
    if not (math.isfinite(current_kpa) and math.isfinite(commanded_kpa)):
        raise InvalidInputError("pressures must be finite")
    if not (math.isfinite(dt) and dt > 0.0):
        raise InvalidInputError(f"dt {dt!r} must be > 0")

    clamped = min(max(commanded_kpa, 0.0), params.max_pressure)
    alpha = 1.0 - math.exp(-dt / params.pressure_time_constant)
    nxt = current_kpa + (clamped - current_kpa) * alpha
    nxt = min(max(nxt, 0.0), params.max_pressure)
    return PressureStep(pressure_kpa=nxt, command_clamped=clamped != commanded_kpa)
