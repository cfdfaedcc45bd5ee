"""Session metrics, confusion matrices, and the on-disk record formats.

Output files are meant to be diffed across runs, so column order is
fixed, floats are printed with a fixed format, and nothing
nondeterministic (timestamps, hostnames) is ever written.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from ..errors import InvalidInputError
from .plans import STIMULI, ManipPlan, ThermalPlan
from .sessions import ManipTrialRecord, ThermalTrialRecord

SUCCESS_LABEL = "success"

THERMAL_CSV_COLUMNS = (
    "trial",
    "stimulus",
    "response",
    "steady_time_s",
    "delay_s",
    "response_time_s",
    "felt_temp_c",
)

MANIP_CSV_COLUMNS = (
    "trial",
    "condition",
    "status",
    "duration_s",
    "mean_indentation_mm",
    "indentation_samples",
    "commanded_depth_mm",
)


@dataclass(frozen=True)
class ConfusionResult:
    labels: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]
    per_class_accuracy: dict[str, Optional[float]]
    overall_accuracy: float


def confusion_matrix(
    records: Sequence[ThermalTrialRecord],
    labels: Sequence[str] = STIMULI,
) -> ConfusionResult:
    """Rows are presented stimuli, columns are responses."""
    if not records:
        raise InvalidInputError("no trial records")
    index = {label: k for k, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for r in records:
        if r.stimulus not in index or r.response not in index:
            raise InvalidInputError(
                f"trial {r.trial}: labels {r.stimulus!r}/{r.response!r} "
                f"outside {tuple(labels)}"
            )
        counts[index[r.stimulus]][index[r.response]] += 1
    per_class: dict[str, Optional[float]] = {}
    diag = 0
    for k, label in enumerate(labels):
        row_total = sum(counts[k])
        diag += counts[k][k]
        per_class[label] = counts[k][k] / row_total if row_total else None
    return ConfusionResult(
        labels=tuple(labels),
        matrix=tuple(tuple(row) for row in counts),
        per_class_accuracy=per_class,
        overall_accuracy=diag / len(records),
    )


@dataclass(frozen=True)
class ManipMetrics:
    trials: int
    successes: int
    success_rate: float
    avg_time_to_success_s: Optional[float]
    avg_indentation_mm: Optional[float]


def manip_metrics(records: Sequence[ManipTrialRecord]) -> ManipMetrics:
    """Session summary using the study's own definitions.

    avg_time_to_success divides the time spent on ALL trials (failures
    included) by the number of successful ones, and is None when
    nothing succeeded. Indentation is pooled sample-weighted across
    trials, counting only moments of actual contact.
    """
    if not records:
        raise InvalidInputError("no trial records")
    successes = sum(1 for r in records if r.status == SUCCESS_LABEL)
    total_time = sum(r.duration_s for r in records)
    pooled_sum = sum(r.mean_indentation_mm * r.indentation_samples for r in records)
    pooled_count = sum(r.indentation_samples for r in records)
    return ManipMetrics(
        trials=len(records),
        successes=successes,
        success_rate=successes / len(records),
        avg_time_to_success_s=(total_time / successes) if successes else None,
        avg_indentation_mm=(pooled_sum / pooled_count) if pooled_count else None,
    )


def _write_csv(path: Path, columns: Sequence[str], rows: list[list]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def write_thermal_csv(path: str | Path, records: Sequence[ThermalTrialRecord]) -> None:
    rows = [
        [
            r.trial,
            r.stimulus,
            r.response,
            f"{r.steady_time_s:.6f}",
            f"{r.delay_s:.6f}",
            f"{r.response_time_s:.6f}",
            f"{r.felt_temp_c:.6f}",
        ]
        for r in records
    ]
    _write_csv(Path(path), THERMAL_CSV_COLUMNS, rows)


def write_manip_csv(path: str | Path, records: Sequence[ManipTrialRecord]) -> None:
    rows = [
        [
            r.trial,
            r.condition,
            r.status,
            f"{r.duration_s:.6f}",
            f"{r.mean_indentation_mm:.6f}",
            r.indentation_samples,
            f"{r.commanded_depth_mm:.6f}",
        ]
        for r in records
    ]
    _write_csv(Path(path), MANIP_CSV_COLUMNS, rows)


def thermal_summary(
    plan: ThermalPlan, records: Sequence[ThermalTrialRecord]
) -> dict:
    conf = confusion_matrix(records)
    mean_response = sum(r.response_time_s for r in records) / len(records)
    return {
        "study": "thermal_identification",
        "seed": plan.seed,
        "trials": len(records),
        "labels": list(conf.labels),
        "confusion_matrix": [list(row) for row in conf.matrix],
        "per_class_accuracy": conf.per_class_accuracy,
        "overall_accuracy": conf.overall_accuracy,
        "mean_response_time_s": mean_response,
    }


def manip_summary(plan: ManipPlan, records: Sequence[ManipTrialRecord]) -> dict:
    m = manip_metrics(records)
    return {
        "study": "pick_and_place",
        "seed": plan.seed,
        "condition": plan.condition,
        "trials": m.trials,
        "successes": m.successes,
        "success_rate": m.success_rate,
        "avg_time_to_success_s": m.avg_time_to_success_s,
        "avg_indentation_mm": m.avg_indentation_mm,
    }


def write_json_summary(path: str | Path, summary: dict) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
