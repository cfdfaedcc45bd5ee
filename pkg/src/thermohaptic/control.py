"""Device-side control chain.

PID temperature regulation with an over-temperature gate, plus the
haptic policy that turns fingertip indentation into pouch pressure.
Everything here is a pure step function over explicit state records so
the caller owns all state and steps are trivially reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError

SAFETY_HYSTERESIS_C = 2.0


@dataclass(frozen=True)
class PidGains:
    """Positional PID gains and output range.

    kp is duty per degC, ki duty per degC-second, kd duty-seconds per
    degC.  integral_limit bounds the stored integral term in duty units
    (anti-windup by clamping).
    """

    kp: float
    ki: float
    kd: float
    output_min: float = 0.0
    output_max: float = 1.0
    integral_limit: float = 0.16

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise InvalidInputError(f"{name} must be finite and >= 0")
        if not (math.isfinite(self.output_min) and math.isfinite(self.output_max)):
            raise InvalidInputError("output range must be finite")
        if not self.output_min < self.output_max:
            raise InvalidInputError("output_min must be < output_max")
        if not (math.isfinite(self.integral_limit) and self.integral_limit > 0.0):
            raise InvalidInputError("integral_limit must be finite and > 0")


# Tuned in closed loop against the fitted plant; the same values ship as
# config defaults.  Larger ki looks tempting but limit-cycles near the
# bottom of the setpoint range, where passive cooling is weak.
DEFAULT_PID_GAINS = PidGains(kp=0.08, ki=0.02, kd=0.0)


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    initialized: bool = False


@dataclass(frozen=True)
class SafetyLimits:
    max_temp: float = 50.0
    min_setpoint: float = 25.0
    max_setpoint: float = 50.0
    setpoint_tolerance: float = 1.0

    def __post_init__(self):
        vals = (
            self.max_temp,
            self.min_setpoint,
            self.max_setpoint,
            self.setpoint_tolerance,
        )
        if any(not math.isfinite(v) for v in vals):
            raise InvalidInputError("limits must be finite")
        if not self.min_setpoint < self.max_setpoint <= self.max_temp:
            raise InvalidInputError("need min_setpoint < max_setpoint <= max_temp")
        if self.setpoint_tolerance <= 0.0:
            raise InvalidInputError("setpoint_tolerance must be > 0")


DEFAULT_SAFETY_LIMITS = SafetyLimits()


@dataclass(frozen=True)
class PressurePolicy:
    max_pressure: float = 20.0     # kPa
    max_indentation: float = 20.0  # mm
    hold_pressure: float = 10.0    # kPa

    def __post_init__(self):
        vals = (self.max_pressure, self.max_indentation, self.hold_pressure)
        if any(not (math.isfinite(v) and v > 0.0) for v in vals):
            raise InvalidInputError("policy fields must be finite and > 0")
        if self.hold_pressure > self.max_pressure:
            raise InvalidInputError("hold_pressure must be <= max_pressure")


DEFAULT_PRESSURE_POLICY = PressurePolicy()


def pid_step(
    gains: PidGains,
    state: PidState,
    setpoint: float,
    measured: float,
    dt: float,
) -> tuple[float, PidState]:
    """One positional PID update; returns (duty, next state).

    The integral term accumulates ki*error*dt and is clamped to
    +/-integral_limit.  The derivative acts on the error and is
    suppressed on the first call after reset, when there is no previous
    error to difference against.
    """
    if not (math.isfinite(setpoint) and math.isfinite(measured)):
        raise InvalidInputError("setpoint and measured must be finite")
    if not (math.isfinite(dt) and dt > 0.0):
        raise InvalidInputError(f"dt {dt!r} must be > 0")

    error = setpoint - measured
    limit = gains.integral_limit
    integral = min(max(state.integral + gains.ki * error * dt, -limit), limit)
    derivative = (error - state.prev_error) / dt if state.initialized else 0.0

    duty = gains.kp * error + integral + gains.kd * derivative
    duty = min(max(duty, gains.output_min), gains.output_max)
    return duty, PidState(integral=integral, prev_error=error, initialized=True)


def safety_gate(
    duty: float,
    measured: float,
    limits: SafetyLimits = DEFAULT_SAFETY_LIMITS,
    latched: bool = False,
) -> tuple[float, bool]:
    """Cut heater drive above the temperature limit; returns (duty, latched).

    Trips to zero output at measured >= max_temp and stays tripped until
    the reading falls below max_temp minus a 2 degC hysteresis band, so
    a reading hovering at the limit cannot chatter the heater.
    """
    if not math.isfinite(duty):
        raise InvalidInputError("duty must be finite")
    if not math.isfinite(measured):
        # treat a broken reading as over-limit: fail toward heater off
        return 0.0, True
    if measured >= limits.max_temp:
        return 0.0, True
    if latched and measured >= limits.max_temp - SAFETY_HYSTERESIS_C:
        return 0.0, True
    return duty, False


def clamp_setpoint(setpoint: float, limits: SafetyLimits = DEFAULT_SAFETY_LIMITS) -> float:
    """Restrict a requested setpoint to the allowed command range."""
    if not math.isfinite(setpoint):
        raise InvalidInputError("setpoint must be finite")
    return min(max(setpoint, limits.min_setpoint), limits.max_setpoint)


def indentation_to_pressure(
    indentation_mm: float, policy: PressurePolicy = DEFAULT_PRESSURE_POLICY
) -> float:
    """Pouch pressure command in kPa for a measured indentation depth."""
    if not (math.isfinite(indentation_mm) and indentation_mm >= 0.0):
        raise InvalidInputError("indentation must be finite and >= 0")
    pressure = indentation_mm * (policy.max_pressure / policy.max_indentation)
    return min(pressure, policy.max_pressure)
