"""Release gate: one test per shipping criterion.

Each test here states a promise the package makes to its users. They are
deliberately end to end (frozen plant constants, wire frames, the real
CLI) so a regression anywhere in the stack trips exactly one line of
this file. Module tests elsewhere cover the details; this file covers
the contract.
"""

from __future__ import annotations

import filecmp
import json
import math
import random
import struct
import subprocess
import sys
import time

import pytest

from thermohaptic.device.core import (
    DeviceConfig,
    INDEX,
    PidGains,
    THUMB,
    device_tick,
    indentation_to_pressure,
    initial_device_state,
)
from thermohaptic.experiments.metrics import manip_metrics
from thermohaptic.experiments.plans import HAPTIC_FEEDBACK, NO_FEEDBACK, plan_manip, plan_thermal
from thermohaptic.experiments.sessions import run_manip_session, run_thermal_session
from thermohaptic.experiments.stats import paired_t_test, sign_test
from thermohaptic.experiments.subjects import SubjectModel
from thermohaptic.plant import (
    DEFAULT_THERMAL_PARAMS,
    extract_features,
    force_from_pressure,
    heater_off_equilibrium,
    simulate_protocol_trace,
)
from thermohaptic import protocol


DT = 1.0 / DeviceConfig().control_rate_hz


def wire(payload: protocol.Payload, seq: int) -> bytes:
    return protocol.encode(protocol.Frame(seq=seq, timestamp_us=0, payload=payload))


def march(config, state, ticks, first_inbox=()):
    inbox = first_inbox
    for _ in range(ticks):
        state, _ = device_tick(config, state, inbox, DT)
        inbox = ()
    return state


def test_thermal_step_unloaded():
    started = time.perf_counter()
    baseline = heater_off_equilibrium(DEFAULT_THERMAL_PARAMS, contact=False)
    trace = simulate_protocol_trace(DEFAULT_THERMAL_PARAMS, contact=False)
    feats = extract_features(trace, 40.0, baseline)
    elapsed = time.perf_counter() - started

    assert abs(feats.time_to_target - 8.4) <= 0.8
    assert abs(feats.avg_heating_rate - 1.79) <= 0.15
    assert abs(feats.peak_heating_rate - 3.0) <= 0.4
    # cooldown is measured to entry of the 1 degC band around baseline
    assert abs(feats.cooling_time_to_baseline - 90.0) <= 15.0
    assert abs(feats.max_cooling_rate - 0.4) <= 0.1
    assert elapsed < 5.0


def test_thermal_step_contact():
    floor = heater_off_equilibrium(DEFAULT_THERMAL_PARAMS, contact=True)
    assert abs(floor - 34.0) <= 0.5

    # cooldown band is anchored at the nominal 34 degC a bench would quote,
    # not at the model's own floor
    trace = simulate_protocol_trace(DEFAULT_THERMAL_PARAMS, contact=True)
    feats = extract_features(trace, 40.0, 34.0)
    assert abs(feats.time_to_target - 7.6) <= 0.8
    assert abs(feats.avg_heating_rate - 0.79) <= 0.1
    assert abs(feats.cooling_time_to_baseline - 70.0) <= 15.0


def test_force_map():
    # 50 kPa at zero clearance is the calibration anchor, exact by construction
    assert force_from_pressure(50.0, 0.0) == 8.93
    assert abs(force_from_pressure(50.0, 1.0) - 8.5) <= 0.2
    assert abs(force_from_pressure(50.0, 2.0) - 7.7) <= 0.2
    assert abs(force_from_pressure(50.0, 3.0) - 6.6) <= 0.2

    # retention at 2 mm clearance holds across the whole drive range
    for k in range(1, 101):
        pressure = 0.5 * k
        ratio = force_from_pressure(pressure, 2.0) / force_from_pressure(pressure, 0.0)
        assert abs(ratio - 0.86) <= 0.02


def _settled_error(setpoint_c: float, contact: bool) -> float:
    """Largest |fabric - setpoint| over 10 s after a 40 s settling run."""
    config = DeviceConfig()
    state = initial_device_state(config)
    if contact:
        state = march(config, state, 500, (wire(protocol.HoldPressure(kpa=10.0), 1),))
    inbox = (wire(protocol.TempSetpoint(index_c=setpoint_c, thumb_c=setpoint_c), 2),)
    state = march(config, state, 4000, inbox)
    worst = 0.0
    for _ in range(1000):
        state, _ = device_tick(config, state, (), DT)
        for ch in (INDEX, THUMB):
            worst = max(worst, abs(state.channels[ch].thermal.fabric_temp - setpoint_c))
    return worst


def test_closed_loop_control_and_safety_gate():
    for setpoint in range(30, 46):
        assert _settled_error(float(setpoint), contact=False) <= 1.0
    # skin contact pins the passive floor near 34.5 degC, so the reachable
    # sweep starts at 34; below-floor setpoints are covered by the next block
    for setpoint in range(34, 46):
        assert _settled_error(float(setpoint), contact=True) <= 1.0

    # below the contact floor the loop can only turn the heater off
    config = DeviceConfig()
    state = initial_device_state(config)
    state = march(config, state, 500, (wire(protocol.HoldPressure(kpa=10.0), 1),))
    state = march(config, state, 12000, (wire(protocol.TempSetpoint(index_c=30.0, thumb_c=30.0), 2),))
    floor = heater_off_equilibrium(config.thermal, contact=True)
    for ch in (INDEX, THUMB):
        assert state.channels[ch].duty == 0.0
        assert abs(state.channels[ch].thermal.fabric_temp - floor) <= 0.1

    # adversarial gains: the comparator must hold duty at zero over the limit
    hot_gains = PidGains(kp=5.0, ki=0.5, kd=0.0, output_min=0.0, output_max=1.0, integral_limit=1.0)
    config = DeviceConfig(gains=hot_gains)
    state = initial_device_state(config)
    inbox = (wire(protocol.TempSetpoint(index_c=50.0, thumb_c=50.0), 1),)
    tripped = False
    for _ in range(20000):
        state, _ = device_tick(config, state, inbox, DT)
        inbox = ()
        for ch in (INDEX, THUMB):
            chan = state.channels[ch]
            if chan.latched:
                tripped = True
                assert chan.duty == 0.0
            if chan.sensed_temp_c >= 50.0:
                assert chan.duty == 0.0
            assert chan.thermal.fabric_temp < 54.0
    assert tripped


def test_indentation_pressure_policy():
    assert indentation_to_pressure(0.0) == 0.0
    assert indentation_to_pressure(10.0) == 10.0
    assert indentation_to_pressure(20.0) == 20.0
    assert indentation_to_pressure(35.0) == 20.0


def _f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _random_frame(rng: random.Random) -> protocol.Frame:
    kind = rng.randrange(5)
    if kind == 0:
        payload: protocol.Payload = protocol.IndentationUpdate(
            index_mm=_f32(rng.uniform(0.0, 40.0)), thumb_mm=_f32(rng.uniform(0.0, 40.0))
        )
    elif kind == 1:
        payload = protocol.TempSetpoint(
            index_c=_f32(rng.uniform(20.0, 55.0)), thumb_c=_f32(rng.uniform(20.0, 55.0))
        )
    elif kind == 2:
        payload = protocol.Telemetry(*(_f32(rng.uniform(-5.0, 60.0)) for _ in range(6)))
    elif kind == 3:
        payload = protocol.HoldPressure(kpa=_f32(rng.uniform(0.0, 25.0)))
    else:
        payload = protocol.Ack(acked_seq=rng.randrange(2**32))
    return protocol.Frame(
        seq=rng.randrange(2**32), timestamp_us=rng.randrange(2**48), payload=payload
    )


def test_protocol_round_trip_and_corruption():
    rng = random.Random(20260819)
    started = time.perf_counter()

    for _ in range(100_000):
        frame = _random_frame(rng)
        assert protocol.decode(protocol.encode(frame)) == frame

    # any single flipped bit must be rejected, whatever field it lands in
    pool = [protocol.encode(_random_frame(rng)) for _ in range(64)]
    rejected = 0
    for _ in range(10_000):
        buf = bytearray(rng.choice(pool))
        bit = rng.randrange(len(buf) * 8)
        buf[bit // 8] ^= 1 << (bit % 8)
        try:
            protocol.decode(bytes(buf))
        except protocol.ProtocolError:
            rejected += 1
    assert rejected == 10_000

    # sequence numbers wrap; "newer" is circular distance, not magnitude
    fresh = protocol.SeqState()
    ok, state = protocol.accept(fresh, 2**32 - 1)
    assert ok
    ok, state = protocol.accept(state, 0)
    assert ok and state.last == 0
    ok, _ = protocol.accept(state, 2**32 - 1)
    assert not ok

    # off heater command survives the wire as a quiet NaN pair
    off = protocol.decode(
        protocol.encode(
            protocol.Frame(
                seq=9, timestamp_us=0, payload=protocol.TempSetpoint(float("nan"), float("nan"))
            )
        )
    )
    assert isinstance(off.payload, protocol.TempSetpoint)
    assert math.isnan(off.payload.index_c) and math.isnan(off.payload.thumb_c)

    assert time.perf_counter() - started < 10.0


def _t_density(x: float, df: int) -> float:
    log_c = math.lgamma((df + 1) / 2.0) - math.lgamma(df / 2.0) - 0.5 * math.log(df * math.pi)
    return math.exp(log_c - ((df + 1) / 2.0) * math.log(1.0 + x * x / df))


def _two_tailed_by_quadrature(t: float, df: int) -> float:
    """Simpson integral of the central density; independent of the shipped CDF."""
    upper = abs(t)
    if upper == 0.0:
        return 1.0
    n = 4000
    h = upper / n
    total = _t_density(0.0, df) + _t_density(upper, df)
    for i in range(1, n):
        total += (4.0 if i % 2 else 2.0) * _t_density(i * h, df)
    central = total * h / 3.0
    return max(0.0, min(1.0, 1.0 - 2.0 * central))


def test_paired_t_statistics():
    result = paired_t_test((2.0, 4.0, 6.0), (1.0, 2.0, 3.0))
    assert result.df == 2
    assert abs(result.t - 3.4641) <= 1e-4
    assert abs(result.p - _two_tailed_by_quadrature(result.t, result.df)) <= 1e-4

    rng = random.Random(99173)
    for _ in range(100):
        n = rng.randint(3, 30)
        a = [rng.uniform(-5.0, 5.0) for _ in range(n)]
        b = [ai + rng.uniform(-3.0, 3.0) for ai in a]
        result = paired_t_test(a, b)
        assert abs(result.p - _two_tailed_by_quadrature(result.t, result.df)) <= 1e-4


def test_cli_determinism(tmp_path):
    outputs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "thermohaptic", "experiment-manip", "--seed", "7",
             "--out-dir", str(out_dir)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(sorted(p.name for p in out_dir.iterdir()))
    assert outputs[0] == outputs[1] and outputs[0]

    for name in outputs[0]:
        first, second = tmp_path / "first" / name, tmp_path / "second" / name
        assert filecmp.cmp(first, second, shallow=False), name
    summary_name = next(n for n in outputs[0] if n.endswith(".json"))
    summary = json.loads((tmp_path / "first" / summary_name).read_text())
    assert summary["trials"] == 15


def test_subject_and_feedback_substitutes():
    # a noise free subject must identify every stimulus from felt temperature
    records = run_thermal_session(plan_thermal(11), SubjectModel(noise_sigma_c=0.0, delay_sigma_s=0.0))
    assert len(records) == 18
    assert all(r.response == r.stimulus for r in records)

    # measured-indentation grip beats the blind grip on every seed, and the
    # indentation gap is one-sided enough for the package's own sign test
    feedback_depths = []
    blind_depths = []
    for seed in range(1, 21):
        with_fb = manip_metrics(run_manip_session(plan_manip(seed, HAPTIC_FEEDBACK)))
        without_fb = manip_metrics(run_manip_session(plan_manip(seed, NO_FEEDBACK)))
        assert with_fb.success_rate >= without_fb.success_rate
        assert with_fb.avg_indentation_mm < without_fb.avg_indentation_mm
        feedback_depths.append(with_fb.avg_indentation_mm)
        blind_depths.append(without_fb.avg_indentation_mm)

    result = sign_test(blind_depths, feedback_depths)
    assert result.p < 0.05
