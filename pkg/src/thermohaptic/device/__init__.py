"""Firmware emulator: control loop core and the network service around it."""

from .core import (
    ADC_BITS,
    CONTACT_THRESHOLD_KPA,
    DIVIDER_OHM,
    ChannelState,
    DeviceConfig,
    DeviceState,
    adc_code,
    device_tick,
    initial_device_state,
    resistance_from_code,
    sense_temperature,
)

__all__ = [
    "ADC_BITS",
    "CONTACT_THRESHOLD_KPA",
    "DIVIDER_OHM",
    "ChannelState",
    "DeviceConfig",
    "DeviceState",
    "adc_code",
    "device_tick",
    "initial_device_state",
    "resistance_from_code",
    "sense_temperature",
]
