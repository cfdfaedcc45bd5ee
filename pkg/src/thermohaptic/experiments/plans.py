"""Deterministic trial plans for the thermal and manipulation studies.

A plan is a frozen value derived only from a seed, so two runs with the
same seed execute identical trial sequences. Shuffling is written out
explicitly (Fisher-Yates over ``rng.randrange``) because the exact
sequence for a given seed is part of the reproducibility contract and
must not drift with library internals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from ..errors import InvalidInputError

COOL = "cool"
WARM = "warm"
HOT = "hot"
STIMULI = (COOL, WARM, HOT)

# Setpoint per stimulus, degrees C. The cool stimulus turns the heater
# off entirely and lets skin contact set the resting temperature.
STIMULUS_SETPOINTS_C: dict[str, Optional[float]] = {
    COOL: None,
    WARM: 40.5,
    HOT: 43.5,
}

TRIALS_PER_STIMULUS = 6
HOLD_PRESSURE_KPA = 10.0
DEFLATED_WAIT_S = 20.0

MANIP_TRIALS_PER_CONDITION = 15


def _shuffle(items: list[str], rng: random.Random) -> list[str]:
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.randrange(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


@dataclass(frozen=True)
class ThermalPlan:
    seed: int
    stimuli: tuple[str, ...]
    hold_pressure_kpa: float
    deflated_wait_s: float

    @property
    def trial_count(self) -> int:
        return len(self.stimuli)


def plan_thermal(seed: int) -> ThermalPlan:
    """Balanced randomized order: 6 trials of each stimulus."""
    if not isinstance(seed, int):
        raise InvalidInputError("seed must be an integer")
    rng = random.Random(seed)
    pool = [s for s in STIMULI for _ in range(TRIALS_PER_STIMULUS)]
    order = _shuffle(pool, rng)
    return ThermalPlan(
        seed=seed,
        stimuli=tuple(order),
        hold_pressure_kpa=HOLD_PRESSURE_KPA,
        deflated_wait_s=DEFLATED_WAIT_S,
    )


HAPTIC_FEEDBACK = "haptic"
NO_FEEDBACK = "none"
CONDITIONS = (HAPTIC_FEEDBACK, NO_FEEDBACK)


@dataclass(frozen=True)
class ManipPlan:
    seed: int
    condition: str
    trials: int
    timeout_s: float = 30.0

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise InvalidInputError(f"unknown condition {self.condition!r}")
        if self.trials != MANIP_TRIALS_PER_CONDITION:
            raise InvalidInputError(
                f"manipulation sessions run exactly "
                f"{MANIP_TRIALS_PER_CONDITION} trials, got {self.trials}"
            )
        if not self.timeout_s > 0.0:
            raise InvalidInputError("timeout must be > 0")


def plan_manip(seed: int, condition: str, timeout_s: float = 30.0) -> ManipPlan:
    if not isinstance(seed, int):
        raise InvalidInputError("seed must be an integer")
    return ManipPlan(
        seed=seed,
        condition=condition,
        trials=MANIP_TRIALS_PER_CONDITION,
        timeout_s=timeout_s,
    )
