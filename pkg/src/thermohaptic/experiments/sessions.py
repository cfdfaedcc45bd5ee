"""End-to-end study runners over the stepped device core.

Both studies drive the same simulated hardware path a live deployment
would use: commands enter as encoded datagrams, state advances one
control period at a time, and every reading the subject or agent acts
on comes back out through telemetry. Nothing here peeks at plant
internals, so a record produced by these runners is evidence the whole
stack works, not just the physics.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Optional

from ..device.core import INDEX, DeviceConfig, device_tick, initial_device_state
from ..errors import InvalidInputError, SimulationDivergedError
from ..physics import (
    DEFAULT_COUPLING,
    DEFAULT_PHYSICS_DT,
    CouplingParams,
    InProgress,
    Success,
    TaskParams,
    default_scene,
    indentation,
    physics_step,
    status_label,
    task_step,
)
from ..plant.forcemap import force_from_pressure
from ..protocol import (
    Frame,
    HoldPressure,
    IndentationUpdate,
    Telemetry,
    TempSetpoint,
    encode,
)
from .agents import (
    AgentParams,
    PickPlaceAgent,
    blind_agent_params,
    draw_blind_depth_mm,
    feedback_agent_params,
)
from .plans import HAPTIC_FEEDBACK, STIMULUS_SETPOINTS_C, ManipPlan, ThermalPlan
from .subjects import SubjectModel

# Steady-state detector over the 5 Hz sensed channel. The rate is
# measured across a 1 s baseline so one ADC step cannot fake a trend,
# and must stay low for 3 s of consecutive samples. The long run
# matters: when the element is still discharging heat from the previous
# trial the fabric rises, tops out, and then decays, and the flat top
# of that hump shows a near-zero rate for up to ~2 s. Any hump high
# enough to confuse classification decays faster than the run length
# tolerates, so detection always lands on the true tail.
STEADY_RATE_C_PER_S = 0.05
STEADY_BASELINE_S = 1.0
STEADY_CONSECUTIVE = 15
MIN_STEADY_TIME_S = 2.0
THERMAL_TRIAL_CAP_S = 120.0

# Session-local rng streams are decorrelated from the plan shuffle by a
# fixed integer mix, never by hashing strings (string hashes vary per
# process and would break cross-run determinism).
_THERMAL_STREAM_MIX = 0x9E3779B9
_MANIP_STREAM_MIX = 0x3C6EF372


class _DeviceHarness:
    """Host side of the wire: encodes commands, steps ticks, keeps the
    latest telemetry."""

    def __init__(self, config: DeviceConfig) -> None:
        self.config = config
        self.state = initial_device_state(config)
        self.time_s = 0.0
        self._seq = 0
        self._pending: list[bytes] = []
        self.last_telemetry: Optional[Telemetry] = None

    def send(self, payload) -> None:
        frame = Frame(
            seq=self._seq,
            timestamp_us=round(self.time_s * 1e6),
            payload=payload,
        )
        self._seq = (self._seq + 1) & 0xFFFFFFFF
        self._pending.append(encode(frame))

    def tick(self) -> None:
        dt = self.config.dt
        self.state, outbox = device_tick(self.config, self.state, self._pending, dt)
        self._pending = []
        self.time_s += dt
        for frame in outbox:
            if isinstance(frame.payload, Telemetry):
                self.last_telemetry = frame.payload

    def fresh_sense_this_tick(self) -> bool:
        return (self.state.tick - 1) % self.config.sense_divisor == 0

    @property
    def sensed_index_c(self) -> float:
        return self.state.channels[INDEX].sensed_temp_c


@dataclass(frozen=True)
class ThermalTrialRecord:
    trial: int
    stimulus: str
    response: str
    steady_time_s: float
    delay_s: float
    response_time_s: float
    felt_temp_c: float


def _setpoint_wire(value: Optional[float]) -> float:
    return float("nan") if value is None else value


def run_thermal_session(
    plan: ThermalPlan,
    subject: SubjectModel,
    config: Optional[DeviceConfig] = None,
) -> list[ThermalTrialRecord]:
    """Run the full identification session and return one record per trial.

    Per trial: inflate to the hold pressure, command the stimulus
    setpoint (the trial clock starts here, so recorded response times
    include the heating transient), wait for the sensed temperature to
    go steady, let the subject classify what it feels, then vent and
    idle before the next trial.
    """
    cfg = config if config is not None else DeviceConfig()
    rng = random.Random(plan.seed ^ _THERMAL_STREAM_MIX)
    dev = _DeviceHarness(cfg)
    dt = cfg.dt
    sense_period = cfg.sense_divisor * dt
    baseline_samples = max(1, round(STEADY_BASELINE_S / sense_period))
    deflate_ticks = round(plan.deflated_wait_s / dt)
    cap_ticks = round(THERMAL_TRIAL_CAP_S / dt)

    records: list[ThermalTrialRecord] = []
    for i, stimulus in enumerate(plan.stimuli):
        wire = _setpoint_wire(STIMULUS_SETPOINTS_C[stimulus])
        dev.send(HoldPressure(kpa=plan.hold_pressure_kpa))
        dev.send(TempSetpoint(index_c=wire, thumb_c=wire))

        window: deque[float] = deque(maxlen=baseline_samples + 1)
        window.append(dev.sensed_index_c)
        steady_run = 0
        steady_time: Optional[float] = None
        felt = dev.sensed_index_c
        for tick_no in range(1, cap_ticks + 1):
            dev.tick()
            if not dev.fresh_sense_this_tick():
                continue
            sensed = dev.sensed_index_c
            window.append(sensed)
            t = tick_no * dt
            if len(window) <= baseline_samples:
                continue
            rate = abs(window[-1] - window[0]) / (baseline_samples * sense_period)
            if t >= MIN_STEADY_TIME_S and rate < STEADY_RATE_C_PER_S:
                steady_run += 1
            else:
                steady_run = 0
            if steady_run >= STEADY_CONSECUTIVE:
                steady_time = t
                felt = sensed
                break
        if steady_time is None:
            raise SimulationDivergedError(
                f"trial {i} ({stimulus}) never settled within {THERMAL_TRIAL_CAP_S} s"
            )

        response = subject.classify(felt, rng)
        delay_ticks = max(1, round(subject.response_delay_s(rng) / dt))
        for _ in range(delay_ticks):
            dev.tick()
        delay_s = delay_ticks * dt

        records.append(
            ThermalTrialRecord(
                trial=i,
                stimulus=stimulus,
                response=response,
                steady_time_s=steady_time,
                delay_s=delay_s,
                response_time_s=steady_time + delay_s,
                felt_temp_c=felt,
            )
        )

        dev.send(HoldPressure(kpa=0.0))
        dev.send(TempSetpoint(index_c=float("nan"), thumb_c=float("nan")))
        for _ in range(deflate_ticks):
            dev.tick()

    return records


@dataclass(frozen=True)
class ManipTrialRecord:
    trial: int
    condition: str
    status: str
    duration_s: float
    mean_indentation_mm: float
    indentation_samples: int
    commanded_depth_mm: float


def _felt_force_n(tel: Optional[Telemetry]) -> Optional[float]:
    if tel is None:
        return None
    per_finger = (
        force_from_pressure(tel.index_pressure_kpa, 0.0),
        force_from_pressure(tel.thumb_pressure_kpa, 0.0),
    )
    return 0.5 * (per_finger[0] + per_finger[1])


def run_manip_session(
    plan: ManipPlan,
    config: Optional[DeviceConfig] = None,
    coupling: CouplingParams = DEFAULT_COUPLING,
    agent_params: Optional[AgentParams] = None,
    physics_dt: float = DEFAULT_PHYSICS_DT,
) -> list[ManipTrialRecord]:
    """Run one pick-and-place session (one condition, fresh scene per trial).

    With feedback the agent co-simulates against the device: measured
    indentations stream in as datagrams, the grip servo acts on the
    force implied by returned telemetry pressure. Without feedback the
    loop is physics only and the grip depth is the trial's open-loop
    draw.
    """
    haptic = plan.condition == HAPTIC_FEEDBACK
    cfg = config if config is not None else DeviceConfig()
    control_dt = cfg.dt
    substeps = round(control_dt / physics_dt)
    if abs(substeps * physics_dt - control_dt) > 1e-12:
        raise InvalidInputError("physics_dt must divide the control period")
    rng = random.Random(plan.seed ^ _MANIP_STREAM_MIX)
    task_params = TaskParams(timeout_s=plan.timeout_s)

    records: list[ManipTrialRecord] = []
    for i in range(plan.trials):
        scene = default_scene()
        if agent_params is not None:
            params = agent_params
        elif haptic:
            params = feedback_agent_params()
        else:
            params = blind_agent_params(draw_blind_depth_mm(rng))
        agent = PickPlaceAgent(params)
        agent.reset(scene, coupling)
        dev = _DeviceHarness(cfg) if haptic else None

        status = InProgress()
        t = 0.0
        felt: Optional[float] = None
        ind_sum = 0.0
        ind_count = 0
        while isinstance(status, InProgress):
            proxies = agent.update(t, felt if haptic else None, control_dt)
            for _ in range(substeps):
                scene = physics_step(scene, proxies, coupling, physics_dt)
                t += physics_dt
                pair = (proxies.index_pos, proxies.thumb_pos)
                for j in range(2):
                    if scene.contact_flags[j]:
                        ind_sum += indentation(pair[j], scene.sphere_pos[j])
                        ind_count += 1
                status = task_step(status, scene, t, task_params)
                if not isinstance(status, InProgress):
                    break
            if haptic and isinstance(status, InProgress):
                pair = (proxies.index_pos, proxies.thumb_pos)
                depths = [
                    indentation(pair[j], scene.sphere_pos[j], scene.contact_flags[j])
                    for j in range(2)
                ]
                dev.send(IndentationUpdate(index_mm=depths[0], thumb_mm=depths[1]))
                dev.tick()
                felt = _felt_force_n(dev.last_telemetry)

        duration = status.time if isinstance(status, Success) else t
        records.append(
            ManipTrialRecord(
                trial=i,
                condition=plan.condition,
                status=status_label(status),
                duration_s=duration,
                mean_indentation_mm=(ind_sum / ind_count) if ind_count else 0.0,
                indentation_samples=ind_count,
                commanded_depth_mm=agent.depth_mm,
            )
        )

    return records
