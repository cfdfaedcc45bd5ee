import random
from pathlib import Path

import pytest

from thermohaptic.errors import InvalidInputError
from thermohaptic.plant.forcemap import (
    DEFAULT_FORCE_MAP,
    ClearanceForceMap,
    fit_force_map,
    force_from_pressure,
)
from thermohaptic.plant.traces import read_force_csv

FIXTURE = Path(__file__).resolve().parent.parent / "paper_force.csv"


def test_bench_maxima_at_50_kpa() -> None:
    assert force_from_pressure(50.0, 0.0) == pytest.approx(8.93, abs=1e-9)
    assert force_from_pressure(50.0, 1.0) == pytest.approx(8.5, abs=1e-9)
    assert force_from_pressure(50.0, 2.0) == pytest.approx(7.7, abs=1e-9)
    assert force_from_pressure(50.0, 3.0) == pytest.approx(6.6, abs=1e-9)


def test_two_millimetre_clearance_keeps_86_percent_of_the_force() -> None:
    for p in (5.0, 12.5, 20.0, 35.0, 50.0):
        ratio = force_from_pressure(p, 2.0) / force_from_pressure(p, 0.0)
        assert ratio == pytest.approx(0.8622620380739081, abs=1e-12)


def test_interpolates_between_measured_clearances() -> None:
    assert force_from_pressure(50.0, 1.5) == pytest.approx(8.1, abs=1e-9)


def test_clearance_beyond_the_grid_holds_the_last_slope() -> None:
    assert force_from_pressure(50.0, 5.0) == force_from_pressure(50.0, 3.0)


def test_zero_pressure_means_zero_force_everywhere() -> None:
    for c in (0.0, 0.5, 1.5, 3.0, 8.0):
        assert force_from_pressure(0.0, c) == 0.0


def test_fit_recovers_exact_synthetic_slopes() -> None:
    rows = []
    for c, slope in ((0.0, 0.21), (2.0, 0.15)):
        for p in (5.0, 10.0, 25.0, 50.0):
            rows.append((p, slope * p, c))
    fmap = fit_force_map(rows)
    assert fmap.clearance_grid == (0.0, 2.0)
    assert fmap.slope_per_clearance[0] == pytest.approx(0.21, abs=1e-12)
    assert fmap.slope_per_clearance[1] == pytest.approx(0.15, abs=1e-12)


def test_fit_averages_out_measurement_noise() -> None:
    rng = random.Random(41)
    rows = []
    for c, slope in ((0.0, 0.18), (1.0, 0.17), (2.0, 0.15)):
        for _ in range(200):
            p = rng.uniform(5.0, 50.0)
            rows.append((p, slope * p + rng.gauss(0.0, 0.05), c))
    fmap = fit_force_map(rows)
    for got, want in zip(fmap.slope_per_clearance, (0.18, 0.17, 0.15)):
        assert got == pytest.approx(want, abs=0.002)


def test_fit_on_the_shipped_measurement_table_matches_the_default_map() -> None:
    fmap = fit_force_map(read_force_csv(FIXTURE))
    assert fmap.clearance_grid == DEFAULT_FORCE_MAP.clearance_grid
    for got, want in zip(
        fmap.slope_per_clearance, DEFAULT_FORCE_MAP.slope_per_clearance
    ):
        assert got == pytest.approx(want, abs=1e-9)


def test_rejects_degenerate_inputs() -> None:
    with pytest.raises(InvalidInputError):
        force_from_pressure(-1.0, 0.0)
    with pytest.raises(InvalidInputError):
        force_from_pressure(10.0, -0.5)
    with pytest.raises(InvalidInputError):
        fit_force_map([(10.0, 1.7, 0.0)])
    with pytest.raises(InvalidInputError):
        fit_force_map([(0.0, 0.0, 0.0), (0.0, 0.0, 1.0)])
    with pytest.raises(InvalidInputError):
        ClearanceForceMap(clearance_grid=(0.0, 1.0), slope_per_clearance=(0.1, 0.2))
