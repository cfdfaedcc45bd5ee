"""Beta-equation model of the NTC temperature sensor.

The sensor is specified by its resistance at 25 degC and a beta constant;
conversion both ways uses the standard two-point beta equation

    R(T) = r25 * exp(beta * (1/T - 1/T25))      (T in kelvin)

which is strictly decreasing in temperature, so the inverse is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidInputError

KELVIN_OFFSET = 273.15
REFERENCE_TEMP_C = 25.0


@dataclass(frozen=True)
class ThermistorModel:
    r25: float = 50_000.0  # ohm at 25 degC
    beta: float = 3950.0   # K

    def __post_init__(self):
        if not (math.isfinite(self.r25) and self.r25 > 0.0):
            raise InvalidInputError("r25 must be finite and > 0")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise InvalidInputError("beta must be finite and > 0")


def thermistor_resistance(temp_c: float, model: ThermistorModel) -> float:
    """Sensor resistance in ohm at temp_c."""
    if not math.isfinite(temp_c):
        raise InvalidInputError("temperature must be finite")
    t = temp_c + KELVIN_OFFSET
    t_ref = REFERENCE_TEMP_C + KELVIN_OFFSET
    return model.r25 * math.exp(model.beta * (1.0 / t - 1.0 / t_ref))


def thermistor_temperature(resistance_ohm: float, model: ThermistorModel) -> float:
    """Temperature in degC at which the sensor reads resistance_ohm."""
    if not (math.isfinite(resistance_ohm) and resistance_ohm > 0.0):
        raise InvalidInputError("resistance must be finite and > 0")
    t_ref = REFERENCE_TEMP_C + KELVIN_OFFSET
    inv_t = math.log(resistance_ohm / model.r25) / model.beta + 1.0 / t_ref
    return 1.0 / inv_t - KELVIN_OFFSET
