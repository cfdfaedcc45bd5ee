"""Scripted pick-and-place agents for the manipulation study.

One trajectory generator serves both study conditions. The agent walks
a fixed phase schedule (approach, press, lift, carry, lower, release)
and emits proxy fingertip targets; what differs between conditions is
how the squeeze depth is chosen:

* with feedback, the agent servoes the depth so the force felt through
  the fingertip pads holds a light but secure level, well above the
  slip threshold and far below a crushing grip;
* without feedback, the depth is an open-loop guess drawn once per
  trial, which is sometimes too deep and occasionally below the slip
  threshold entirely.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from ..errors import InvalidInputError
from ..physics import CouplingParams, ProxyPair, Scene
from ..plant.forcemap import force_from_pressure

# Felt pad pressure the feedback agent regulates toward. Through the
# default pad force map at zero clearance this is a fingertip force of
# about 1.14 N per finger.
DEFAULT_GRIP_PAD_PRESSURE_KPA = 6.4

# Open-loop squeeze depth distribution for the no-feedback condition.
# Wide on purpose: without felt force the agent cannot calibrate its
# grip, so depths scatter from barely-slipping to needlessly deep.
BLIND_DEPTH_MEAN_MM = 9.3
BLIND_DEPTH_SIGMA_MM = 4.0
BLIND_DEPTH_MIN_MM = 0.2
BLIND_DEPTH_MAX_MM = 18.0


@dataclass(frozen=True)
class AgentParams:
    approach_s: float = 1.0
    press_s: float = 0.8
    lift_s: float = 1.5
    carry_s: float = 2.5
    lower_s: float = 1.5
    release_s: float = 0.8
    lift_height_mm: float = 35.0
    grip_depth_mm: float = 3.0
    force_target_n: Optional[float] = None
    servo_gain_mm_per_ns: float = 12.0
    min_depth_mm: float = 0.5
    max_depth_mm: float = 18.0

    def __post_init__(self) -> None:
        for name in ("approach_s", "press_s", "lift_s", "carry_s", "lower_s", "release_s"):
            if not getattr(self, name) > 0.0:
                raise InvalidInputError(f"{name} must be > 0")
        if not (0.0 < self.min_depth_mm <= self.grip_depth_mm <= self.max_depth_mm):
            raise InvalidInputError("need min_depth <= grip_depth <= max_depth")
        if self.force_target_n is not None and not self.force_target_n > 0.0:
            raise InvalidInputError("force target must be > 0 when set")
        if not self.servo_gain_mm_per_ns >= 0.0:
            raise InvalidInputError("servo gain must be >= 0")


def feedback_agent_params() -> AgentParams:
    return AgentParams(
        force_target_n=force_from_pressure(DEFAULT_GRIP_PAD_PRESSURE_KPA, 0.0)
    )


def blind_agent_params(depth_mm: float) -> AgentParams:
    depth = min(max(depth_mm, BLIND_DEPTH_MIN_MM), BLIND_DEPTH_MAX_MM)
    return AgentParams(
        grip_depth_mm=depth,
        force_target_n=None,
        min_depth_mm=min(depth, 0.5),
    )


def draw_blind_depth_mm(rng: random.Random) -> float:
    raw = rng.gauss(BLIND_DEPTH_MEAN_MM, BLIND_DEPTH_SIGMA_MM)
    return min(max(raw, BLIND_DEPTH_MIN_MM), BLIND_DEPTH_MAX_MM)


def _lerp(a: float, b: float, u: float) -> float:
    return a + (b - a) * u


class PickPlaceAgent:
    """Phase-scheduled trajectory generator with optional grip servo.

    The agent reads its waypoints off the scene at reset time: where
    the cube starts, how far a fingertip must travel to touch it, and
    where the drop-off surface is. Targets are then pure functions of
    trial time plus the current squeeze depth.
    """

    def __init__(self, params: AgentParams) -> None:
        self.params = params
        self._depth = params.grip_depth_mm
        self._geometry_ready = False

    def reset(self, scene: Scene, coupling: CouplingParams) -> None:
        p = self.params
        self._depth = p.grip_depth_mm
        cx, cy, cz = scene.cube_pos
        half = scene.cube_size / 2.0
        self._cube_x = cx
        self._cube_y = cy
        self._cube_z = cz
        index_start, thumb_start = scene.sphere_pos
        self._touch_off = half + coupling.sphere_radius
        self._start_off = abs(index_start[1] - cy)
        self._sides = (
            -1.0 if index_start[1] < cy else 1.0,
            -1.0 if thumb_start[1] < cy else 1.0,
        )
        if self._sides[0] == self._sides[1]:
            raise InvalidInputError("fingertips must start on opposite faces")
        if self._start_off <= self._touch_off:
            raise InvalidInputError("fingertips must start clear of the object")
        self._carry_dx = scene.target_stand.center_x - cx
        self._place_z = scene.target_stand.top_height + half
        self._geometry_ready = True

    @property
    def depth_mm(self) -> float:
        return self._depth

    def total_motion_s(self) -> float:
        p = self.params
        return p.approach_s + p.press_s + p.lift_s + p.carry_s + p.lower_s + p.release_s

    def update(self, t: float, felt_force_n: Optional[float], dt: float) -> ProxyPair:
        """Advance the grip servo and return proxy targets for time t."""
        if not self._geometry_ready:
            raise InvalidInputError("agent not reset against a scene")
        if not (math.isfinite(t) and t >= 0.0 and dt > 0.0):
            raise InvalidInputError("need finite t >= 0 and dt > 0")
        p = self.params
        t1 = p.approach_s
        t2 = t1 + p.press_s
        t3 = t2 + p.lift_s
        t4 = t3 + p.carry_s
        t5 = t4 + p.lower_s
        t6 = t5 + p.release_s

        servo_active = (
            p.force_target_n is not None
            and felt_force_n is not None
            and t2 <= t < t5
        )
        if servo_active:
            err = p.force_target_n - felt_force_n
            self._depth = min(
                max(self._depth + p.servo_gain_mm_per_ns * err * dt, p.min_depth_mm),
                p.max_depth_mm,
            )

        if t < t1:
            y_off = _lerp(self._start_off, self._touch_off, t / t1)
            x, z = self._cube_x, self._cube_z
        elif t < t2:
            y_off = self._touch_off - self._depth * ((t - t1) / p.press_s)
            x, z = self._cube_x, self._cube_z
        elif t < t3:
            y_off = self._touch_off - self._depth
            x = self._cube_x
            z = _lerp(self._cube_z, self._cube_z + p.lift_height_mm, (t - t2) / p.lift_s)
        elif t < t4:
            y_off = self._touch_off - self._depth
            x = _lerp(self._cube_x, self._cube_x + self._carry_dx, (t - t3) / p.carry_s)
            z = self._cube_z + p.lift_height_mm
        elif t < t5:
            y_off = self._touch_off - self._depth
            x = self._cube_x + self._carry_dx
            z = _lerp(self._cube_z + p.lift_height_mm, self._place_z, (t - t4) / p.lower_s)
        elif t < t6:
            y_off = _lerp(self._touch_off - self._depth, self._start_off, (t - t5) / p.release_s)
            x = self._cube_x + self._carry_dx
            z = self._place_z
        else:
            y_off = self._start_off
            x = self._cube_x + self._carry_dx
            z = self._place_z

        s_index, s_thumb = self._sides
        return ProxyPair(
            index_pos=(x, self._cube_y + s_index * y_off, z),
            thumb_pos=(x, self._cube_y + s_thumb * y_off, z),
        )
