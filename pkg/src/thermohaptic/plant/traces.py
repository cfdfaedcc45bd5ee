"""CSV reading and writing for temperature traces and force measurements.

Files are UTF-8 with LF line endings and dot decimal separators.
Temperature traces use the header ``time_s,temp_c``; force measurement
tables use ``pressure_kpa,force_n,clearance_mm``.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from ..errors import InvalidInputError
from .thermal import ThermalTrace

TRACE_HEADER = ("time_s", "temp_c")
FORCE_HEADER = ("pressure_kpa", "force_n", "clearance_mm")


def _open_read(path: str | Path) -> io.TextIOWrapper:
    return open(path, "r", encoding="utf-8", newline="")


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InvalidInputError(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise InvalidInputError(f"{where}: non-finite value {text!r}")
    return value


def write_trace_csv(path: str | Path, times: list[float], temps: list[float]) -> None:
    if len(times) != len(temps):
        raise InvalidInputError("times and temps must have equal length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for t, temp in zip(times, temps):
            writer.writerow([f"{t:.6f}", f"{temp:.6f}"])


def read_trace_csv(path: str | Path) -> ThermalTrace:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
            raise InvalidInputError(
                f"expected header {','.join(TRACE_HEADER)}, got {header!r}"
            )
        times: list[float] = []
        temps: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InvalidInputError(f"line {lineno}: expected 2 columns")
            times.append(_parse_float(row[0], f"line {lineno} time_s"))
            temps.append(_parse_float(row[1], f"line {lineno} temp_c"))
    if len(times) < 2:
        raise InvalidInputError("trace needs at least 2 samples")
    return ThermalTrace(times=tuple(times), temps=tuple(temps))


def write_force_csv(
    path: str | Path, rows: list[tuple[float, float, float]]
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FORCE_HEADER)
        for pressure, force, clearance in rows:
            writer.writerow([f"{pressure:.6f}", f"{force:.6f}", f"{clearance:.6f}"])


def read_force_csv(path: str | Path) -> list[tuple[float, float, float]]:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != FORCE_HEADER:
            raise InvalidInputError(
                f"expected header {','.join(FORCE_HEADER)}, got {header!r}"
            )
        rows: list[tuple[float, float, float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InvalidInputError(f"line {lineno}: expected 3 columns")
            rows.append(
                (
                    _parse_float(row[0], f"line {lineno} pressure_kpa"),
                    _parse_float(row[1], f"line {lineno} force_n"),
                    _parse_float(row[2], f"line {lineno} clearance_mm"),
                )
            )
    if not rows:
        raise InvalidInputError("no measurement rows")
    return rows
