"""Pressure-to-force map of the pouch at each fingerpad clearance.

The bench characterization shows force rising linearly with pressure at
every tested clearance, with the slope falling as the deflated pouch
starts farther from the pad.  The map stores one slope per measured
clearance (0..3 mm) and interpolates between them; beyond the last
measured clearance the slope is held flat rather than extrapolated.

The 0.05 N preload is the calibration reference that defined the
zero-clearance position on the bench; it is not an output offset, so
force at zero pressure is zero at every clearance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidInputError

PRELOAD_FORCE_N = 0.05

# Slopes reproducing the bench maxima at 50 kPa: 8.93, 8.5, 7.7, 6.6 N
# for clearances 0, 1, 2, 3 mm.
DEFAULT_CLEARANCE_GRID_MM = (0.0, 1.0, 2.0, 3.0)
DEFAULT_SLOPES_N_PER_KPA = (0.1786, 0.17, 0.154, 0.132)


@dataclass(frozen=True)
class ClearanceForceMap:
    clearance_grid: tuple[float, ...] = DEFAULT_CLEARANCE_GRID_MM
    slope_per_clearance: tuple[float, ...] = DEFAULT_SLOPES_N_PER_KPA
    preload_force: float = PRELOAD_FORCE_N

    def __post_init__(self):
        grid = self.clearance_grid
        slopes = self.slope_per_clearance
        if len(grid) != len(slopes) or len(grid) < 2:
            raise InvalidInputError("need matching grids of at least 2 clearances")
        if any(not math.isfinite(v) for v in grid + slopes):
            raise InvalidInputError("grid and slopes must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError("clearance grid must be strictly increasing")
        if any(s <= 0.0 for s in slopes):
            raise InvalidInputError("slopes must be strictly positive")
        if any(b > a for a, b in zip(slopes, slopes[1:])):
            raise InvalidInputError("slopes must be non-increasing with clearance")


DEFAULT_FORCE_MAP = ClearanceForceMap()


def _slope_at(clearance: float, fmap: ClearanceForceMap) -> float:
    grid = fmap.clearance_grid
    slopes = fmap.slope_per_clearance
    if clearance <= grid[0]:
        return slopes[0]
    if clearance >= grid[-1]:
        return slopes[-1]
    for i in range(len(grid) - 1):
        if grid[i] <= clearance <= grid[i + 1]:
            frac = (clearance - grid[i]) / (grid[i + 1] - grid[i])
            return slopes[i] + frac * (slopes[i + 1] - slopes[i])
    raise AssertionError("unreachable: grid scan exhausted")


def force_from_pressure(
    pressure_kpa: float, clearance_mm: float, fmap: ClearanceForceMap = DEFAULT_FORCE_MAP
) -> float:
    """Fingerpad normal force in N at the given pressure and clearance."""
    if not (math.isfinite(pressure_kpa) and pressure_kpa >= 0.0):
        raise InvalidInputError("pressure must be finite and >= 0")
    if not (math.isfinite(clearance_mm) and clearance_mm >= 0.0):
        raise InvalidInputError("clearance must be finite and >= 0")
    return _slope_at(clearance_mm, fmap) * pressure_kpa


def fit_force_map(rows: list[tuple[float, float, float]]) -> ClearanceForceMap:
    """Identify per-clearance slopes from (pressure_kpa, force_n, clearance_mm) rows.

    Least squares through the origin per clearance (the pouch exerts no
    force unpressurized), grid taken from the distinct clearances seen.
    """
    by_clearance: dict[float, list[tuple[float, float]]] = {}
    for pressure, force, clearance in rows:
        if not all(math.isfinite(v) for v in (pressure, force, clearance)):
            raise InvalidInputError("rows must be finite")
        if pressure < 0.0 or clearance < 0.0:
            raise InvalidInputError("pressure and clearance must be >= 0")
        by_clearance.setdefault(clearance, []).append((pressure, force))

    grid = sorted(by_clearance)
    if len(grid) < 2:
        raise InvalidInputError("need measurements at 2+ clearances")
    slopes = []
    for clearance in grid:
        pts = by_clearance[clearance]
        denom = sum(p * p for p, _ in pts)
        if denom <= 0.0:
            raise InvalidInputError(
                f"no nonzero pressures measured at clearance {clearance} mm"
            )
        slopes.append(sum(p * f for p, f in pts) / denom)
    return ClearanceForceMap(
        clearance_grid=tuple(grid), slope_per_clearance=tuple(slopes)
    )
