"""Firmware emulator core: two actuator channels behind a fixed-rate loop.

The loop composes the plant models and the control chain exactly the way
the firmware would: indentation or hold-pressure commands drive the
pouch, temperature setpoints drive the heater PID, and every sensed
temperature passes through the thermistor, a resistor divider, and a
12-bit ADC before the controller sees it.

``device_tick`` is pure: it maps (config, state, inbox datagrams) to
(state, outbox frames).  All loop bookkeeping lives in DeviceState so
stepped runs are bit-deterministic and the service wrapper stays thin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

from ..control import (
    DEFAULT_PID_GAINS,
    DEFAULT_PRESSURE_POLICY,
    DEFAULT_SAFETY_LIMITS,
    PidGains,
    PidState,
    PressurePolicy,
    SafetyLimits,
    clamp_setpoint,
    indentation_to_pressure,
    pid_step,
    safety_gate,
)
from ..errors import InvalidInputError
from ..plant.pneumatic import PneumaticPlantParams, pressure_step
from ..plant.thermal import (
    DEFAULT_THERMAL_PARAMS,
    ThermalPlantParams,
    ThermalState,
    thermal_step,
)
from ..plant.thermistor import (
    ThermistorModel,
    thermistor_resistance,
    thermistor_temperature,
)
from ..protocol import (
    Ack,
    Frame,
    HoldPressure,
    IndentationUpdate,
    ProtocolError,
    SeqState,
    TempSetpoint,
    Telemetry,
    accept,
    decode,
)

ADC_BITS = 12
DIVIDER_OHM = 50_000.0
CONTACT_THRESHOLD_KPA = 2.0

INDEX = 0
THUMB = 1


@dataclass(frozen=True)
class DeviceConfig:
    thermal: ThermalPlantParams = DEFAULT_THERMAL_PARAMS
    pneumatic: PneumaticPlantParams = PneumaticPlantParams()
    gains: PidGains = DEFAULT_PID_GAINS
    limits: SafetyLimits = DEFAULT_SAFETY_LIMITS
    policy: PressurePolicy = DEFAULT_PRESSURE_POLICY
    thermistor: ThermistorModel = ThermistorModel()
    control_rate_hz: float = 100.0
    sensing_rate_hz: float = 5.0
    telemetry_rate_hz: float = 50.0

    def __post_init__(self):
        rates = (self.control_rate_hz, self.sensing_rate_hz, self.telemetry_rate_hz)
        if any(not (math.isfinite(r) and r > 0.0) for r in rates):
            raise InvalidInputError("loop rates must be finite and > 0")
        if self.sensing_rate_hz > self.control_rate_hz:
            raise InvalidInputError("sensing rate must not exceed control rate")
        if self.telemetry_rate_hz > self.control_rate_hz:
            raise InvalidInputError("telemetry rate must not exceed control rate")
        for name, rate in (
            ("sensing", self.sensing_rate_hz),
            ("telemetry", self.telemetry_rate_hz),
        ):
            ratio = self.control_rate_hz / rate
            if abs(ratio - round(ratio)) > 1e-9:
                raise InvalidInputError(
                    f"{name} rate must divide the control rate evenly"
                )

    @property
    def dt(self) -> float:
        return 1.0 / self.control_rate_hz

    @property
    def sense_divisor(self) -> int:
        return round(self.control_rate_hz / self.sensing_rate_hz)

    @property
    def telemetry_divisor(self) -> int:
        return round(self.control_rate_hz / self.telemetry_rate_hz)


def adc_code(resistance_ohm: float, bits: int = ADC_BITS, divider_ohm: float = DIVIDER_OHM) -> int:
    """ADC reading of the thermistor-over-divider voltage ratio."""
    if not (math.isfinite(resistance_ohm) and resistance_ohm > 0.0):
        raise InvalidInputError("resistance must be finite and > 0")
    full = (1 << bits) - 1
    code = round(full * resistance_ohm / (resistance_ohm + divider_ohm))
    return min(max(int(code), 0), full)


def resistance_from_code(code: int, bits: int = ADC_BITS, divider_ohm: float = DIVIDER_OHM) -> float:
    """Invert the divider ratio; end codes are pulled in to avoid the poles."""
    full = (1 << bits) - 1
    if not 0 <= code <= full:
        raise InvalidInputError(f"code must be in [0, {full}]")
    clamped = min(max(code, 1), full - 1)
    return divider_ohm * clamped / (full - clamped)


def sense_temperature(true_temp_c: float, model: ThermistorModel) -> float:
    """True fabric temperature as seen through the full sensing pipeline."""
    code = adc_code(thermistor_resistance(true_temp_c, model))
    return thermistor_temperature(resistance_from_code(code), model)


@dataclass(frozen=True)
class ChannelState:
    thermal: ThermalState
    pressure_kpa: float = 0.0
    setpoint_c: float | None = None   # None = heater off
    pid: PidState = PidState()
    latched: bool = False
    contact: bool = False
    sensed_temp_c: float = 0.0        # zero-order-held 5 Hz reading
    duty: float = 0.0


@dataclass(frozen=True)
class DeviceState:
    channels: tuple[ChannelState, ChannelState]
    tick: int = 0
    time_us: int = 0
    out_seq: int = 0
    seq_indent: SeqState = SeqState()
    seq_setpoint: SeqState = SeqState()
    seq_hold: SeqState = SeqState()
    # newest accepted pressure command, either kind; None = deflated
    pressure_cmd: IndentationUpdate | HoldPressure | None = None
    malformed_count: int = 0
    stale_count: int = 0


def initial_device_state(config: DeviceConfig) -> DeviceState:
    ambient = config.thermal.ambient_temp
    start = ThermalState(element_temp=ambient, fabric_temp=ambient)
    sensed = sense_temperature(ambient, config.thermistor)
    channel = ChannelState(thermal=start, sensed_temp_c=sensed)
    return DeviceState(channels=(channel, channel))


def _setpoint_from_wire(value: float, limits: SafetyLimits) -> float | None:
    if math.isnan(value):
        return None
    return clamp_setpoint(value, limits)


def _commanded_pressures(
    cmd: IndentationUpdate | HoldPressure | None, policy: PressurePolicy
) -> tuple[float, float]:
    if cmd is None:
        return 0.0, 0.0
    if isinstance(cmd, HoldPressure):
        kpa = min(max(cmd.kpa, 0.0), policy.max_pressure)
        return kpa, kpa
    return (
        indentation_to_pressure(max(cmd.index_mm, 0.0), policy),
        indentation_to_pressure(max(cmd.thumb_mm, 0.0), policy),
    )


def device_tick(
    config: DeviceConfig,
    state: DeviceState,
    inbox: Iterable[bytes],
    dt: float,
) -> tuple[DeviceState, list[Frame]]:
    """Advance the device by one control period.

    Inbox datagrams are decoded here so a malformed packet is counted
    and dropped instead of taking the loop down.  Setpoint and
    hold-pressure frames are acknowledged; indentation and telemetry
    are idempotent state and are not.
    """
    if abs(dt * config.control_rate_hz - 1.0) > 1e-9:
        raise InvalidInputError("dt must equal one control period")

    out_seq = state.out_seq
    malformed = state.malformed_count
    stale = state.stale_count
    seq_indent = state.seq_indent
    seq_setpoint = state.seq_setpoint
    seq_hold = state.seq_hold
    pressure_cmd = state.pressure_cmd
    setpoints = [ch.setpoint_c for ch in state.channels]
    outbox: list[Frame] = []

    def emit(payload) -> None:
        nonlocal out_seq
        outbox.append(Frame(seq=out_seq, timestamp_us=state.time_us, payload=payload))
        out_seq = (out_seq + 1) & 0xFFFFFFFF

    for datagram in inbox:
        try:
            frame = decode(datagram)
        except ProtocolError:
            malformed += 1
            continue
        payload = frame.payload
        if isinstance(payload, IndentationUpdate):
            keep, seq_indent = accept(seq_indent, frame.seq)
            if keep:
                pressure_cmd = payload
            else:
                stale += 1
        elif isinstance(payload, TempSetpoint):
            keep, seq_setpoint = accept(seq_setpoint, frame.seq)
            if keep:
                setpoints[INDEX] = _setpoint_from_wire(payload.index_c, config.limits)
                setpoints[THUMB] = _setpoint_from_wire(payload.thumb_c, config.limits)
                emit(Ack(acked_seq=frame.seq))
            else:
                stale += 1
        elif isinstance(payload, HoldPressure):
            keep, seq_hold = accept(seq_hold, frame.seq)
            if keep:
                pressure_cmd = payload
                emit(Ack(acked_seq=frame.seq))
            else:
                stale += 1
        # Telemetry and Ack arriving at the device are valid frames with
        # nothing to do; ignore them.

    sample_sensor = state.tick % config.sense_divisor == 0
    commanded = _commanded_pressures(pressure_cmd, config.policy)

    new_channels = []
    for idx, channel in enumerate(state.channels):
        # comparator reads a fresh conversion every tick; the PID only
        # sees the 5 Hz held sample
        fresh = sense_temperature(channel.thermal.fabric_temp, config.thermistor)
        sensed = fresh if sample_sensor else channel.sensed_temp_c

        step = pressure_step(channel.pressure_kpa, commanded[idx], config.pneumatic, dt)
        contact = step.pressure_kpa > CONTACT_THRESHOLD_KPA

        setpoint = setpoints[idx]
        if setpoint is None:
            duty, pid = 0.0, PidState()
        else:
            duty, pid = pid_step(config.gains, channel.pid, setpoint, sensed, dt)
        duty, latched = safety_gate(duty, fresh, config.limits, channel.latched)

        thermal = thermal_step(channel.thermal, config.thermal, duty, contact, dt)
        new_channels.append(
            ChannelState(
                thermal=thermal,
                pressure_kpa=step.pressure_kpa,
                setpoint_c=setpoint,
                pid=pid,
                latched=latched,
                contact=contact,
                sensed_temp_c=sensed,
                duty=duty,
            )
        )

    tick = state.tick + 1
    time_us = state.time_us + round(dt * 1e6)
    next_state = DeviceState(
        channels=(new_channels[INDEX], new_channels[THUMB]),
        tick=tick,
        time_us=time_us,
        out_seq=out_seq,
        seq_indent=seq_indent,
        seq_setpoint=seq_setpoint,
        seq_hold=seq_hold,
        pressure_cmd=pressure_cmd,
        malformed_count=malformed,
        stale_count=stale,
    )

    if tick % config.telemetry_divisor == 0:
        index, thumb = next_state.channels
        telemetry = Telemetry(
            index_temp_c=index.sensed_temp_c,
            thumb_temp_c=thumb.sensed_temp_c,
            index_pressure_kpa=index.pressure_kpa,
            thumb_pressure_kpa=thumb.pressure_kpa,
            index_duty=index.duty,
            thumb_duty=thumb.duty,
        )
        frame = Frame(seq=next_state.out_seq, timestamp_us=time_us, payload=telemetry)
        outbox.append(frame)
        next_state = replace(next_state, out_seq=(next_state.out_seq + 1) & 0xFFFFFFFF)

    return next_state, outbox
