"""Synthetic participant for the temperature identification study.

This is a declared instrument, not a human model with any claim to
validity: it exists so the full pipeline (stimulus, plant, sensing,
classification, statistics) can run end to end and be tested. A
noiseless subject is a perfect oracle; the default noise level leaves
the warm stimulus close enough to the upper decision boundary that
roughly one warm trial in twenty reads as hot, which is the
interesting regime for the confusion matrix machinery.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..errors import InvalidInputError
from .plans import COOL, HOT, WARM


@dataclass(frozen=True)
class SubjectModel:
    noise_sigma_c: float = 1.0
    boundaries_c: tuple[float, float] = (37.0, 42.0)
    delay_mean_s: float = 1.5
    delay_sigma_s: float = 0.4
    delay_min_s: float = 0.2

    def __post_init__(self) -> None:
        lo, hi = self.boundaries_c
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise InvalidInputError("decision boundaries must be ordered and finite")
        if not (math.isfinite(self.noise_sigma_c) and self.noise_sigma_c >= 0.0):
            raise InvalidInputError("noise sigma must be >= 0")
        if self.delay_sigma_s < 0.0 or self.delay_min_s < 0.0:
            raise InvalidInputError("delay parameters must be >= 0")
        if self.delay_mean_s < self.delay_min_s:
            raise InvalidInputError("mean delay must be >= minimum delay")

    def classify(self, felt_temp_c: float, rng: random.Random) -> str:
        """One perceptual draw per trial, taken at decision time."""
        if not math.isfinite(felt_temp_c):
            raise InvalidInputError("felt temperature must be finite")
        perceived = felt_temp_c
        if self.noise_sigma_c > 0.0:
            perceived += rng.gauss(0.0, self.noise_sigma_c)
        lo, hi = self.boundaries_c
        if perceived < lo:
            return COOL
        if perceived < hi:
            return WARM
        return HOT

    def response_delay_s(self, rng: random.Random) -> float:
        if self.delay_sigma_s == 0.0:
            return max(self.delay_min_s, self.delay_mean_s)
        return max(self.delay_min_s, rng.gauss(self.delay_mean_s, self.delay_sigma_s))
