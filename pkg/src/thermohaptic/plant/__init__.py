"""Plant models: thermal dynamics, sensing, pneumatics, and the force map."""

from .features import StepFeatures, extract_features
from .fitting import (
    BENCH_CONTACT_FEATURES,
    BENCH_UNLOADED_FEATURES,
    feature_residuals,
    fit_thermal_params,
    simulate_protocol_trace,
)
from .forcemap import (
    DEFAULT_FORCE_MAP,
    ClearanceForceMap,
    fit_force_map,
    force_from_pressure,
)
from .pneumatic import PneumaticPlantParams, PressureStep, pressure_step
from .thermal import (
    DEFAULT_DT,
    DEFAULT_THERMAL_PARAMS,
    ThermalPlantParams,
    ThermalState,
    ThermalTrace,
    equilibrium_state,
    heater_off_equilibrium,
    hold_duty,
    run_step_protocol,
    thermal_step,
)
from .thermistor import ThermistorModel, thermistor_resistance, thermistor_temperature
from .traces import (
    read_force_csv,
    read_trace_csv,
    write_force_csv,
    write_trace_csv,
)

__all__ = [
    "BENCH_CONTACT_FEATURES",
    "BENCH_UNLOADED_FEATURES",
    "ClearanceForceMap",
    "DEFAULT_DT",
    "DEFAULT_FORCE_MAP",
    "DEFAULT_THERMAL_PARAMS",
    "PneumaticPlantParams",
    "PressureStep",
    "StepFeatures",
    "ThermalPlantParams",
    "ThermalState",
    "ThermalTrace",
    "ThermistorModel",
    "equilibrium_state",
    "extract_features",
    "feature_residuals",
    "fit_force_map",
    "fit_thermal_params",
    "force_from_pressure",
    "heater_off_equilibrium",
    "hold_duty",
    "pressure_step",
    "read_force_csv",
    "read_trace_csv",
    "run_step_protocol",
    "simulate_protocol_trace",
    "thermal_step",
    "thermistor_resistance",
    "thermistor_temperature",
    "write_force_csv",
    "write_trace_csv",
]
