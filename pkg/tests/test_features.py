"""Feature extraction checked against traces whose features are known in
closed form: a linear ramp and a pure exponential decay."""

import math

import pytest

from thermohaptic.errors import InvalidInputError
from thermohaptic.plant.features import extract_features


def ramp_then_hold(rate=1.5, baseline=25.0, target=40.0, hold_s=10.0, dt=0.2):
    rise_s = (target - baseline) / rate
    count = round((rise_s + hold_s) / dt) + 1
    times = [dt * k for k in range(count)]
    temps = [min(baseline + rate * t, target) for t in times]
    return times, temps


def test_linear_ramp_features_are_exact() -> None:
    times, temps = ramp_then_hold()
    f = extract_features((times, temps), 40.0, 25.0)
    assert f.time_to_target == pytest.approx(10.0, abs=1e-9)
    assert f.avg_heating_rate == pytest.approx(1.5, abs=1e-9)
    assert f.peak_heating_rate == pytest.approx(1.5, abs=1e-9)
    # the trace never cools, so cooling features are unreachable
    assert f.cooling_time_to_baseline is None
    assert f.max_cooling_rate is None
    assert f.baseline_temp == 25.0


def test_exponential_decay_features_match_hand_computation() -> None:
    # T(t) = 25 + 15 exp(-t/20): the crossing of baseline+1 solves
    # 15 exp(-t/20) = 1, so t = 20 ln 15 = 54.161, measured from the
    # heater-off sample at t = 0.6 (the last one within 0.5 of 40).
    times = [0.2 * k for k in range(301)]
    temps = [25.0 + 15.0 * math.exp(-t / 20.0) for t in times]
    f = extract_features((times, temps), 40.0, 25.0)
    assert f.time_to_target == 0.0
    assert f.avg_heating_rate is None
    assert f.max_cooling_rate == pytest.approx(0.7278462, abs=1e-6)
    assert f.cooling_time_to_baseline == pytest.approx(53.561156, abs=1e-4)


def test_target_never_reached_reports_none() -> None:
    times = [0.0, 1.0, 2.0, 3.0]
    temps = [25.0, 26.0, 27.0, 27.5]
    f = extract_features((times, temps), 40.0, 25.0)
    assert f.time_to_target is None
    assert f.avg_heating_rate is None
    assert f.peak_heating_rate is None


def test_truncated_cooldown_reports_none_for_cooling_time() -> None:
    times = [0.0, 1.0, 2.0, 3.0, 4.0]
    temps = [25.0, 35.0, 40.0, 39.0, 38.0]
    f = extract_features((times, temps), 40.0, 25.0)
    assert f.time_to_target == pytest.approx(2.0)
    assert f.cooling_time_to_baseline is None
    assert f.max_cooling_rate is not None
    assert f.max_cooling_rate > 0.0


def test_accepts_objects_with_times_and_temps() -> None:
    class Trace:
        times = (0.0, 1.0, 2.0)
        temps = (25.0, 30.0, 41.0)

    f = extract_features(Trace(), 40.0, 25.0)
    assert f.time_to_target is not None


def test_rejects_malformed_traces() -> None:
    with pytest.raises(InvalidInputError):
        extract_features(([0.0], [25.0]), 40.0, 25.0)
    with pytest.raises(InvalidInputError):
        extract_features(([0.0, 1.0], [25.0, float("nan")]), 40.0, 25.0)
    with pytest.raises(InvalidInputError):
        extract_features(([0.0, 0.0, 1.0], [25.0, 26.0, 27.0]), 40.0, 25.0)
    with pytest.raises(InvalidInputError):
        extract_features(([0.0, 1.0], [25.0, 26.0, 27.0]), 40.0, 25.0)
