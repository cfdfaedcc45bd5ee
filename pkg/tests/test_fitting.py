"""Plant identification: the shipped parameters against the bench bands,
the exact inner stepper against the public integrator, and the failure
path of the fitter itself."""

import math
from dataclasses import replace

import pytest

from thermohaptic.errors import FitFailureError, InvalidInputError
from thermohaptic.plant.features import StepFeatures, extract_features
from thermohaptic.plant.fitting import (
    BENCH_CONTACT_FEATURES,
    BENCH_UNLOADED_FEATURES,
    FIXED_FABRIC_CAPACITY,
    feature_residuals,
    fit_thermal_params,
    simulate_protocol_trace,
)
from thermohaptic.plant.thermal import (
    DEFAULT_THERMAL_PARAMS,
    equilibrium_state,
    run_step_protocol,
)


def test_shipped_plant_sits_inside_every_bench_band() -> None:
    residuals = feature_residuals(DEFAULT_THERMAL_PARAMS)
    assert set(c for c, _ in residuals) == {"unloaded", "contact"}
    for key, r in residuals.items():
        assert math.isfinite(r), key
        assert abs(r) <= 1.0, (key, r)


def test_exact_stepper_agrees_with_the_public_integrator() -> None:
    for contact in (False, True):
        inner = simulate_protocol_trace(DEFAULT_THERMAL_PARAMS, contact)
        public = run_step_protocol(DEFAULT_THERMAL_PARAMS, contact)
        assert len(inner.times) == len(public.times)
        for a, b in zip(inner.times, public.times):
            assert a == pytest.approx(b, abs=1e-9)
        for a, b in zip(inner.temps, public.temps):
            assert a == pytest.approx(b, abs=1e-9)


def test_protocol_trace_shape_and_endpoints() -> None:
    trace = simulate_protocol_trace(DEFAULT_THERMAL_PARAMS, contact=False)
    assert len(trace.times) == 1001
    assert trace.times[0] == 0.0
    assert trace.times[-1] == pytest.approx(200.0, abs=1e-9)
    start = equilibrium_state(DEFAULT_THERMAL_PARAMS, 0.0, False)
    assert trace.temps[0] == start.fabric_temp
    assert max(trace.temps) >= 40.0


def self_targets(contact: bool) -> StepFeatures:
    baseline = equilibrium_state(DEFAULT_THERMAL_PARAMS, 0.0, contact).fabric_temp
    trace = simulate_protocol_trace(DEFAULT_THERMAL_PARAMS, contact)
    return extract_features(trace, 40.0, baseline)


def test_fit_refines_targets_it_can_reach_exactly() -> None:
    unloaded = self_targets(False)
    contact = self_targets(True)
    fitted = fit_thermal_params(
        targets_unloaded=unloaded,
        targets_contact=contact,
        initial=DEFAULT_THERMAL_PARAMS,
        seed=3,
        max_iter=150,
        restarts=0,
    )
    assert fitted.heat_capacity_fabric == FIXED_FABRIC_CAPACITY
    residuals = feature_residuals(fitted, unloaded, contact)
    assert all(abs(r) <= 1.0 for r in residuals.values())


def test_unreachable_targets_fail_with_diagnostics() -> None:
    # a 0.5 s rise with a 1.79 degC/s average rate is self-contradictory
    impossible = replace(
        BENCH_UNLOADED_FEATURES, time_to_target=0.5, avg_heating_rate=1.79
    )
    with pytest.raises(FitFailureError) as err:
        fit_thermal_params(
            targets_unloaded=impossible,
            targets_contact=BENCH_CONTACT_FEATURES,
            seed=1,
            max_iter=120,
            restarts=0,
        )
    assert err.value.best_params is not None
    assert err.value.residuals is not None
    assert ("unloaded", "time_to_target") in err.value.residuals


def test_targets_without_a_baseline_are_rejected() -> None:
    headless = StepFeatures(
        peak_heating_rate=3.0,
        time_to_target=8.4,
        avg_heating_rate=1.79,
        cooling_time_to_baseline=90.0,
        max_cooling_rate=0.4,
        baseline_temp=None,
    )
    with pytest.raises(InvalidInputError):
        fit_thermal_params(targets_unloaded=headless, max_iter=10, restarts=0)
