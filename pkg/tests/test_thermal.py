"""Plant-level checks: each equilibrium and transient is compared
against closed-form heat-balance math, never against the stepper."""

import math
import random

import numpy as np
import pytest
from scipy.linalg import expm

from thermohaptic.errors import InvalidInputError
from thermohaptic.plant.thermal import (
    DEFAULT_THERMAL_PARAMS,
    ThermalPlantParams,
    ThermalState,
    equilibrium_state,
    heater_off_equilibrium,
    hold_duty,
    hold_equilibrium,
    run_step_protocol,
    thermal_step,
)

P = DEFAULT_THERMAL_PARAMS


def analytic_equilibrium(params: ThermalPlantParams, duty: float, contact: bool):
    """Steady state from the heat balance: heater power leaves the element
    through the fabric, then splits between ambient and (if pressed) skin."""
    q = duty * params.heater_max_power
    if contact:
        g = params.conduct_fabric_ambient + params.conduct_fabric_skin
        fabric = (
            q
            + params.conduct_fabric_ambient * params.ambient_temp
            + params.conduct_fabric_skin * params.skin_core_temp
        ) / g
    else:
        fabric = params.ambient_temp + q / params.conduct_fabric_ambient
    element = fabric + q / params.conduct_element_fabric
    return element, fabric


def march(state: ThermalState, duty: float, contact: bool, seconds: float):
    for _ in range(round(seconds / 0.01)):
        state = thermal_step(state, P, duty, contact, 0.01)
    return state


def test_unloaded_heater_off_equilibrium_is_ambient() -> None:
    assert heater_off_equilibrium(P, contact=False) == pytest.approx(
        P.ambient_temp, abs=1e-12
    )
    eq = equilibrium_state(P, 0.0, contact=False)
    assert eq.element_temp == pytest.approx(P.ambient_temp, abs=1e-12)
    assert eq.fabric_temp == pytest.approx(P.ambient_temp, abs=1e-12)


def test_contact_heater_off_equilibrium_matches_heat_balance() -> None:
    _, fabric = analytic_equilibrium(P, 0.0, contact=True)
    assert heater_off_equilibrium(P, contact=True) == pytest.approx(fabric, abs=1e-9)
    # the skin keeps the resting pad well above ambient but below skin core
    assert P.ambient_temp < fabric < P.skin_core_temp


@pytest.mark.parametrize("contact", [False, True])
@pytest.mark.parametrize("duty", [0.25, 1.0])
def test_equilibrium_state_matches_closed_form(contact: bool, duty: float) -> None:
    element, fabric = analytic_equilibrium(P, duty, contact)
    eq = equilibrium_state(P, duty, contact)
    assert eq.element_temp == pytest.approx(element, abs=1e-9)
    assert eq.fabric_temp == pytest.approx(fabric, abs=1e-9)


def test_transient_converges_to_closed_form_equilibrium() -> None:
    element, fabric = analytic_equilibrium(P, 0.3, contact=True)
    state = ThermalState(
        element_temp=P.ambient_temp, fabric_temp=P.ambient_temp, time=0.0
    )
    state = march(state, 0.3, True, 600.0)
    assert state.fabric_temp == pytest.approx(fabric, abs=1e-6)
    assert state.element_temp == pytest.approx(element, abs=1e-6)


def test_step_against_matrix_exponential() -> None:
    # dT/dt = A T + b is linear with constant coefficients, so the exact
    # solution over any horizon is expm(A t); RK4 at 10 ms must track it.
    duty, contact, horizon = 0.6, True, 5.0
    a = np.array(
        [
            [-P.conduct_element_fabric / P.heat_capacity_element,
             P.conduct_element_fabric / P.heat_capacity_element],
            [P.conduct_element_fabric / P.heat_capacity_fabric,
             -(P.conduct_element_fabric + P.conduct_fabric_ambient
               + P.conduct_fabric_skin) / P.heat_capacity_fabric],
        ]
    )
    b = np.array(
        [
            duty * P.heater_max_power / P.heat_capacity_element,
            (P.conduct_fabric_ambient * P.ambient_temp
             + P.conduct_fabric_skin * P.skin_core_temp) / P.heat_capacity_fabric,
        ]
    )
    x0 = np.array([P.ambient_temp, P.ambient_temp])
    x_rest = -np.linalg.solve(a, b)
    exact = expm(a * horizon) @ (x0 - x_rest) + x_rest

    state = ThermalState(element_temp=x0[0], fabric_temp=x0[1], time=0.0)
    state = march(state, duty, contact, horizon)
    assert state.element_temp == pytest.approx(exact[0], abs=1e-8)
    assert state.fabric_temp == pytest.approx(exact[1], abs=1e-8)


def test_halving_the_step_barely_moves_the_answer() -> None:
    coarse = ThermalState(element_temp=25.0, fabric_temp=25.0, time=0.0)
    fine = coarse
    for _ in range(1000):
        coarse = thermal_step(coarse, P, 0.7, False, 0.01)
    for _ in range(2000):
        fine = thermal_step(fine, P, 0.7, False, 0.005)
    assert abs(coarse.fabric_temp - fine.fabric_temp) < 1e-9


def test_hold_duty_actually_holds() -> None:
    duty = hold_duty(P, 40.0, contact=True)
    assert 0.0 < duty < 1.0
    state = hold_equilibrium(P, 40.0, contact=True)
    assert state.fabric_temp == pytest.approx(40.0, abs=1e-9)
    state = march(state, duty, True, 100.0)
    assert state.fabric_temp == pytest.approx(40.0, abs=1e-6)


def test_heater_off_cooling_is_monotone_from_uniform_start() -> None:
    state = ThermalState(element_temp=45.0, fabric_temp=45.0, time=0.0)
    prev = state.fabric_temp
    for _ in range(20000):
        state = thermal_step(state, P, 0.0, False, 0.01)
        assert state.fabric_temp <= prev + 1e-12
        assert state.element_temp >= state.fabric_temp - 1e-12
        assert state.fabric_temp >= P.ambient_temp - 1e-9
        prev = state.fabric_temp


def test_constant_duty_from_ambient_stays_inside_the_equilibrium_box() -> None:
    rng = random.Random(20240811)
    for _ in range(20):
        duty = rng.random()
        contact = rng.random() < 0.5
        element_eq, _ = analytic_equilibrium(P, duty, contact)
        ceiling = max(element_eq, P.ambient_temp)
        state = ThermalState(
            element_temp=P.ambient_temp, fabric_temp=P.ambient_temp, time=0.0
        )
        for _ in range(2000):
            state = thermal_step(state, P, duty, contact, 0.01)
            assert P.ambient_temp - 1e-6 <= state.fabric_temp <= ceiling + 1e-6
            assert P.ambient_temp - 1e-6 <= state.element_temp <= ceiling + 1e-6


def test_step_protocol_trace_shape() -> None:
    trace = run_step_protocol(P, contact=False)
    assert trace.times[0] == 0.0
    assert trace.times[-1] == pytest.approx(200.0, abs=1e-9)
    spacing = np.diff(trace.times)
    assert np.allclose(spacing, 0.2, atol=1e-9)
    assert trace.temps[0] == pytest.approx(P.ambient_temp, abs=1e-6)
    assert max(trace.temps) >= 39.5
    assert trace.temps[-1] < P.ambient_temp + 1.5


def test_rejects_bad_inputs() -> None:
    state = ThermalState(element_temp=25.0, fabric_temp=25.0, time=0.0)
    with pytest.raises(InvalidInputError):
        thermal_step(state, P, -0.1, False, 0.01)
    with pytest.raises(InvalidInputError):
        thermal_step(state, P, 1.1, False, 0.01)
    with pytest.raises(InvalidInputError):
        thermal_step(state, P, 0.5, False, 0.0)
    with pytest.raises(InvalidInputError):
        thermal_step(state, P, 0.5, False, 0.2)
    with pytest.raises(InvalidInputError):
        thermal_step(
            ThermalState(element_temp=float("nan"), fabric_temp=25.0, time=0.0),
            P, 0.5, False, 0.01,
        )
    with pytest.raises(InvalidInputError):
        ThermalPlantParams(
            heat_capacity_element=-1.0,
            heat_capacity_fabric=2.0,
            conduct_element_fabric=0.5,
            conduct_fabric_ambient=0.4,
            conduct_fabric_skin=0.45,
            ambient_temp=25.0,
            skin_core_temp=42.0,
            heater_max_power=50.0,
        )
    with pytest.raises(InvalidInputError):
        run_step_protocol(P, contact=False, heat_hold_s=-1.0)
