"""Step-response feature extraction from fabric-temperature traces.

Features mirror what the bench characterization reports: how fast the
pouch heats, when it first reaches the target, and how long it takes to
drift back to baseline once the heater stops.  Slopes are finite
differences on the trace's own sampling grid (central in the interior,
one-sided at the ends), so a 5 Hz trace yields 5 Hz-resolution rates.

A feature that a trace cannot support (target never reached, cool-down
truncated) is reported as None, an explicit "unreachable" marker, never
a silent zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError

# The hold ripple of any sane drive stays inside this margin below the
# target; the last local maximum inside it marks the heater-off instant.
HOLD_DETECT_MARGIN_C = 0.5
# "Back to baseline" means within this many degrees above it.
BASELINE_RETURN_MARGIN_C = 1.0


@dataclass(frozen=True)
class StepFeatures:
    peak_heating_rate: float | None      # degC/s, max slope while heating
    time_to_target: float | None         # s, first crossing of the target
    avg_heating_rate: float | None       # degC/s, (target-baseline)/time_to_target
    cooling_time_to_baseline: float | None  # s from heater-off to baseline+1
    max_cooling_rate: float | None       # degC/s, steepest descent after heater-off
    baseline_temp: float                 # degC


def _interp_crossing(t0, t1, v0, v1, level) -> float:
    # v0, v1 bracket the level; linear interpolation inside the sample gap
    if v1 == v0:
        return t1
    return t0 + (level - v0) / (v1 - v0) * (t1 - t0)


def _heater_off_index(temps: np.ndarray, target_temp: float) -> int:
    """Last sample still inside the hold margin of the target, i.e. the
    point where the trace leaves the hold band for good.  Falls back to
    the global maximum when the target was never approached."""
    near = np.nonzero(temps >= target_temp - HOLD_DETECT_MARGIN_C)[0]
    if len(near) > 0:
        return int(near[-1])
    return int(np.argmax(temps))


def extract_features(trace, target_temp: float, baseline: float) -> StepFeatures:
    """Compute step-response features of a (times, temps) trace.

    `trace` is anything with .times/.temps or a (times, temps) pair.
    The heater-off instant is recovered from the trace itself: the last
    sample within 0.5 degC of the target, i.e. where the trace finally
    leaves the hold band (a clean corner is its own last such sample; a
    held phase qualifies until the cool-down departs).
    """
    times_seq = getattr(trace, "times", None)
    temps_seq = getattr(trace, "temps", None)
    if times_seq is None or temps_seq is None:
        times_seq, temps_seq = trace
    times = np.asarray(times_seq, dtype=float)
    temps = np.asarray(temps_seq, dtype=float)
    if times.ndim != 1 or times.shape != temps.shape or len(times) < 2:
        raise InvalidInputError("trace needs at least 2 aligned samples")
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(temps))):
        raise InvalidInputError("trace contains non-finite values")
    if np.any(np.diff(times) <= 0.0):
        raise InvalidInputError("trace times must be strictly increasing")

    grad = np.gradient(temps, times)

    reached = np.nonzero(temps >= target_temp)[0]
    if len(reached) == 0:
        time_to_target = None
        peak_rate = None
        avg_rate = None
    else:
        i = int(reached[0])
        if i == 0:
            time_to_target = float(times[0])
        else:
            time_to_target = _interp_crossing(
                times[i - 1], times[i], temps[i - 1], temps[i], target_temp
            )
        peak_rate = float(np.max(grad[: i + 1]))
        avg_rate = (
            (target_temp - baseline) / time_to_target if time_to_target > 0.0 else None
        )

    off = _heater_off_index(temps, target_temp)
    cooling_time = None
    max_cooling = None
    if off < len(temps) - 1:
        descent = -grad[off:]
        max_cooling = float(np.max(descent))
        level = baseline + BASELINE_RETURN_MARGIN_C
        below = np.nonzero(temps[off:] <= level)[0]
        if len(below) > 0:
            j = off + int(below[0])
            if j == off:
                cooling_time = 0.0
            else:
                t_cross = _interp_crossing(
                    times[j - 1], times[j], temps[j - 1], temps[j], level
                )
                cooling_time = float(t_cross - times[off])

    return StepFeatures(
        peak_heating_rate=peak_rate,
        time_to_target=time_to_target,
        avg_heating_rate=avg_rate,
        cooling_time_to_baseline=cooling_time,
        max_cooling_rate=max_cooling,
        baseline_temp=baseline,
    )
