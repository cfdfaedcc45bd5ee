"""Two-node lumped thermal model of one fingertip actuator.

The resistive heater and the fabric pouch it drives are lumped into two
thermal masses joined by a conductance.  The fabric mass leaks to ambient
air always, and to the wearer's skin while the pouch is pressed against
the fingerpad:

    C_e * dTe/dt = duty * P_max          - G_ef * (Te - Tf)
    C_f * dTf/dt = G_ef * (Te - Tf)      - G_fa * (Tf - T_amb)
                                         - [contact] * G_fs * (Tf - T_skin)

One time constant cannot show both the fast initial heating and the slow
tail-end cooling the bench device exhibits; two can.  The element node
acts as a heat reservoir: it charges quickly under power and then drains
slowly through the fabric, which is what stretches the cool-down long
after the heater stops.

Units: temperatures degC, power W, capacities J/degC, conductances W/degC,
time s.  Integration is classic fixed-step RK4; callers that need exact
linear-system stepping (the fitter) build it on top of the same
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..errors import InvalidInputError, SimulationDivergedError

# Fixed control-period step used by the device loop and the step protocol.
DEFAULT_DT = 0.01
# Sampling rate of the bench characterization rigs; features are extracted
# on this grid.
SAMPLE_RATE_HZ = 5.0


@dataclass(frozen=True)
class ThermalPlantParams:
    heat_capacity_element: float   # J/degC
    heat_capacity_fabric: float    # J/degC
    conduct_element_fabric: float  # W/degC
    conduct_fabric_ambient: float  # W/degC
    conduct_fabric_skin: float     # W/degC
    ambient_temp: float            # degC
    skin_core_temp: float          # degC
    heater_max_power: float        # W

    def __post_init__(self):
        positives = (
            self.heat_capacity_element,
            self.heat_capacity_fabric,
            self.conduct_element_fabric,
            self.conduct_fabric_ambient,
            self.conduct_fabric_skin,
            self.heater_max_power,
        )
        if not all(math.isfinite(v) and v > 0.0 for v in positives):
            raise InvalidInputError(
                "capacities, conductances and heater power must be finite and > 0"
            )
        if not (self.ambient_temp < self.skin_core_temp):
            raise InvalidInputError("ambient_temp must lie below skin_core_temp")


# Calibrated plant for the production device, identified from the bench
# step-response features (fitting.fit_thermal_params reproduces it from
# the recorded targets).  Fabric capacity is the gauge anchor; the skin
# sink is an effective perfused-tissue temperature, not a measured skin
# reading, which is why it sits above arterial.
DEFAULT_THERMAL_PARAMS = ThermalPlantParams(
    heat_capacity_element=7.638933160325833,
    heat_capacity_fabric=2.0,
    conduct_element_fabric=0.556396224862436,
    conduct_fabric_ambient=0.368864900095447,
    conduct_fabric_skin=0.436693312294787,
    ambient_temp=25.0,
    skin_core_temp=42.49988615021949,
    heater_max_power=47.55382123832818,
)


@dataclass(frozen=True)
class ThermalState:
    element_temp: float  # degC
    fabric_temp: float   # degC
    time: float = 0.0    # s

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.element_temp)
            and math.isfinite(self.fabric_temp)
            and math.isfinite(self.time)
        )


def thermal_rates(
    state: ThermalState,
    params: ThermalPlantParams,
    heater_duty: float,
    contact: bool,
) -> tuple[float, float]:
    """Right-hand side of the energy balance: (dTe/dt, dTf/dt) in degC/s."""
    te = state.element_temp
    tf = state.fabric_temp
    q_ef = params.conduct_element_fabric * (te - tf)
    q_loss = params.conduct_fabric_ambient * (tf - params.ambient_temp)
    if contact:
        q_loss += params.conduct_fabric_skin * (tf - params.skin_core_temp)
    d_el = (heater_duty * params.heater_max_power - q_ef) / params.heat_capacity_element
    d_fa = (q_ef - q_loss) / params.heat_capacity_fabric
    return d_el, d_fa


def thermal_step(
    state: ThermalState,
    params: ThermalPlantParams,
    heater_duty: float,
    contact: bool,
    dt: float = DEFAULT_DT,
) -> ThermalState:
    """Advance the two-node plant by one RK4 step of length dt."""
    if not (0.0 <= heater_duty <= 1.0):
        raise InvalidInputError(f"heater duty {heater_duty!r} outside [0, 1]")
    if not (math.isfinite(dt) and 0.0 < dt <= 0.1):
        raise InvalidInputError(f"dt {dt!r} outside (0, 0.1] s")
    if not state.is_finite():
        raise InvalidInputError("thermal state is not finite")

    te = state.element_temp
    tf = state.fabric_temp

    def rates(e: float, f: float) -> tuple[float, float]:
        q_ef = params.conduct_element_fabric * (e - f)
        q_loss = params.conduct_fabric_ambient * (f - params.ambient_temp)
        if contact:
            q_loss += params.conduct_fabric_skin * (f - params.skin_core_temp)
        return (
            (heater_duty * params.heater_max_power - q_ef) / params.heat_capacity_element,
            (q_ef - q_loss) / params.heat_capacity_fabric,
        )

    k1e, k1f = rates(te, tf)
    k2e, k2f = rates(te + 0.5 * dt * k1e, tf + 0.5 * dt * k1f)
    k3e, k3f = rates(te + 0.5 * dt * k2e, tf + 0.5 * dt * k2f)
    k4e, k4f = rates(te + dt * k3e, tf + dt * k3f)
    sixth = dt / 6.0
    new = ThermalState(
        element_temp=te + sixth * (k1e + 2.0 * k2e + 2.0 * k3e + k4e),
        fabric_temp=tf + sixth * (k1f + 2.0 * k2f + 2.0 * k3f + k4f),
        time=state.time + dt,
    )
    if not new.is_finite():
        raise SimulationDivergedError("thermal state became non-finite")
    return new


def equilibrium_state(
    params: ThermalPlantParams, heater_duty: float, contact: bool
) -> ThermalState:
    """Steady state for a constant duty: the unique fixed point of the ODE.

    With the heater off and no contact this is ambient on both nodes; with
    contact the fabric settles between ambient and skin temperature,
    weighted by the two conductances.
    """
    if not (0.0 <= heater_duty <= 1.0):
        raise InvalidInputError(f"heater duty {heater_duty!r} outside [0, 1]")
    power = heater_duty * params.heater_max_power
    g_sink = params.conduct_fabric_ambient
    weighted = params.conduct_fabric_ambient * params.ambient_temp
    if contact:
        g_sink += params.conduct_fabric_skin
        weighted += params.conduct_fabric_skin * params.skin_core_temp
    tf = (power + weighted) / g_sink
    te = tf + power / params.conduct_element_fabric
    return ThermalState(element_temp=te, fabric_temp=tf, time=0.0)


def heater_off_equilibrium(params: ThermalPlantParams, contact: bool) -> float:
    """Fabric temperature the pouch settles to with the heater off."""
    return equilibrium_state(params, 0.0, contact).fabric_temp


def _hold_losses(params: ThermalPlantParams, fabric_temp: float, contact: bool) -> float:
    q = params.conduct_fabric_ambient * (fabric_temp - params.ambient_temp)
    if contact:
        q += params.conduct_fabric_skin * (fabric_temp - params.skin_core_temp)
    return q


def hold_equilibrium(
    params: ThermalPlantParams, fabric_temp: float, contact: bool
) -> ThermalState:
    """Steady state with the fabric regulated at fabric_temp.

    The element settles wherever the element-fabric link carries exactly
    the fabric's net losses, so this is the hottest the element gets when
    a controller holds a setpoint indefinitely.
    """
    losses = _hold_losses(params, fabric_temp, contact)
    element = fabric_temp + losses / params.conduct_element_fabric
    return ThermalState(element_temp=element, fabric_temp=fabric_temp, time=0.0)


def hold_duty(params: ThermalPlantParams, fabric_temp: float, contact: bool) -> float:
    """Steady heater duty that holds the fabric at fabric_temp.

    Above 1.0 the setpoint is beyond heater authority; below 0.0 the
    pouch cannot cool itself down to it.
    """
    return _hold_losses(params, fabric_temp, contact) / params.heater_max_power


@dataclass(frozen=True)
class ThermalTrace:
    """Sampled fabric-temperature history: parallel (times, temps) tuples."""

    times: tuple[float, ...]   # s
    temps: tuple[float, ...]   # degC

    def __len__(self) -> int:
        return len(self.times)


# Step-protocol drive: a saturating PI reconstruction of the bench
# controller.  Full duty far below target, proportional throttle near
# it; the clamped integral carries the trace slightly past the target
# (so the first crossing is well-defined) and then trims the hold flat.
PROTOCOL_DRIVE_KP = 0.085  # duty per degC of error
PROTOCOL_DRIVE_KI = 0.12   # duty per degC-second of error
# Integral clamp, in duty units.  Sized just above the steady hold duty
# so windup during the saturated ramp cannot push the fabric more than
# about a degree past the target.
PROTOCOL_DRIVE_I_MAX = 0.16


def protocol_duty(error: float, integral: float, dt: float) -> tuple[float, float]:
    """One drive update: (duty, next integral) for the step protocol.

    The integral is kept inside [0, PROTOCOL_DRIVE_I_MAX] duty-units,
    which bounds windup during the saturated ramp and unwinds it on
    overshoot.
    """
    duty = min(1.0, max(0.0, PROTOCOL_DRIVE_KP * error + integral))
    nxt = min(
        PROTOCOL_DRIVE_I_MAX,
        max(0.0, integral + PROTOCOL_DRIVE_KI * error * dt),
    )
    return duty, nxt


def run_step_protocol(
    params: ThermalPlantParams,
    contact: bool,
    target_temp: float = 40.0,
    heat_hold_s: float = 40.0,
    cool_s: float = 160.0,
    dt: float = DEFAULT_DT,
    sample_hz: float = SAMPLE_RATE_HZ,
    initial: ThermalState | None = None,
) -> ThermalTrace:
    """Reproduce the bench step protocol: drive the fabric to target_temp,
    hold until heat_hold_s, then heater off and record the cool-down.

    Returns the fabric trace on the sample_hz grid, starting at t=0.
    """
    if heat_hold_s < 0.0 or cool_s < 0.0:
        raise InvalidInputError("protocol durations must be non-negative")
    state = initial if initial is not None else equilibrium_state(params, 0.0, contact)
    state = replace(state, time=0.0)

    sample_every = max(1, round(1.0 / (sample_hz * dt)))
    n_steps = round((heat_hold_s + cool_s) / dt)
    heat_steps = round(heat_hold_s / dt)

    times = [state.time]
    temps = [state.fabric_temp]
    integral = 0.0
    for i in range(n_steps):
        if i < heat_steps:
            duty, integral = protocol_duty(
                target_temp - state.fabric_temp, integral, dt
            )
        else:
            duty = 0.0
        state = thermal_step(state, params, duty, contact, dt)
        if (i + 1) % sample_every == 0:
            times.append(state.time)
            temps.append(state.fabric_temp)
    return ThermalTrace(times=tuple(times), temps=tuple(temps))
