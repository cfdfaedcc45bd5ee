"""Statistics for session analysis: paired t-test and exact sign test.

The t-distribution tail is evaluated through the regularized incomplete
beta function, computed here with the standard continued-fraction
expansion (modified Lentz iteration) rather than a numerics library, so
the p-values this package reports are fully self-contained and testable
against an independent quadrature of the t density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..errors import InvalidInputError

_LENTZ_TINY = 1e-300
_LENTZ_EPS = 1e-15
_LENTZ_MAX_ITER = 300


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz method."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _LENTZ_TINY:
        d = _LENTZ_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _LENTZ_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _LENTZ_EPS:
            return h
    raise RuntimeError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (math.isfinite(a) and a > 0.0 and math.isfinite(b) and b > 0.0):
        raise InvalidInputError("shape parameters must be finite and > 0")
    if not (math.isfinite(x) and 0.0 <= x <= 1.0):
        raise InvalidInputError("x must be in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        + math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only on one side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: int) -> float:
    """Two-tailed p-value for a t statistic with df degrees of freedom."""
    if df < 1:
        raise InvalidInputError("df must be >= 1")
    if not math.isfinite(t):
        raise InvalidInputError("t must be finite")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Classic paired t-test on matched samples.

    Raises on degenerate input (length mismatch, n < 2, or all
    differences equal) instead of returning NaN: a zero-variance
    comparison is an analysis bug the caller must see.
    """
    if len(a) != len(b):
        raise InvalidInputError("paired samples must have equal length")
    n = len(a)
    if n < 2:
        raise InvalidInputError("need at least 2 pairs")
    diffs = [float(x) - float(y) for x, y in zip(a, b)]
    if any(not math.isfinite(d) for d in diffs):
        raise InvalidInputError("differences must be finite")
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        raise InvalidInputError("all differences are identical (zero variance)")
    t = mean / math.sqrt(var / n)
    df = n - 1
    return TTestResult(t=t, p=t_two_tailed_p(t, df), df=df)


@dataclass(frozen=True)
class SignTestResult:
    positives: int
    negatives: int
    p: float


def sign_test(a: Sequence[float], b: Sequence[float]) -> SignTestResult:
    """Exact two-tailed sign test on matched samples; ties are discarded."""
    if len(a) != len(b):
        raise InvalidInputError("paired samples must have equal length")
    pos = 0
    neg = 0
    for x, y in zip(a, b):
        d = float(x) - float(y)
        if not math.isfinite(d):
            raise InvalidInputError("differences must be finite")
        if d > 0.0:
            pos += 1
        elif d < 0.0:
            neg += 1
    n = pos + neg
    if n == 0:
        raise InvalidInputError("all pairs are tied")
    k = min(pos, neg)
    tail = sum(math.comb(n, i) for i in range(k + 1)) / 2.0**n
    return SignTestResult(positives=pos, negatives=neg, p=min(1.0, 2.0 * tail))
