"""Estimators of the tail index 1/alpha and scale C, plus their confidence widths.

The confidence parameter delta used by ExtremeHunter is astronomically
small (about 1e-42 at a horizon of 1e4), so :class:`WidthParams` keeps
``log(1/delta)`` and the widths never materialise delta itself.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np


def _ceil_pow(T: int, exponent: float) -> int:
    # ceil(T**exponent) that ignores float noise, e.g. 8**(2/3) = 4.0000000000000004
    v = T ** exponent
    r = round(v)
    if abs(v - r) <= 1e-9 * max(1.0, v):
        return int(r)
    return math.ceil(v)


def hill_order(T: int, b: float) -> int:
    """Number of top order statistics, ceil(T^(2b/(2b+1)))."""
    return _ceil_pow(T, 2.0 * b / (2.0 * b + 1.0))


def hill_from_sorted(positives, T: int, b: float) -> float:
    """Hill estimate from the ascending sequence of strictly positive samples.

    ``T`` is the total sample count (zeros included); it fixes how many order
    statistics enter the average. Accepts a list or an array.
    """
    P = len(positives)
    if P < 2:
        return 0.0
    m = min(hill_order(T, b), P - 1)
    top = np.asarray(positives[P - m - 1:], dtype=float)
    return float(np.sum(np.log(top[1:] / top[0])) / m)


def estimate_h(samples, b: float) -> float:
    """Hill estimator of 1/alpha on the top ceil(T^(2b/(2b+1))) positive samples.

    Falls back to 0 (lightest possible tail) when fewer than two samples are
    strictly positive.

    >>> round(estimate_h([8, 4, 2, 1], b=1.0), 5)
    1.38629
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("estimate_h needs at least one sample")
    positives = np.sort(arr[arr > 0], kind="stable")
    return hill_from_sorted(positives, arr.size, b)


def c_from_sorted(sorted_samples, h_hat: float, b: float) -> float:
    """Scale estimate from the ascending sequence of all samples."""
    T = len(sorted_samples)
    threshold = T ** (h_hat / (2.0 * b + 1.0))
    exceed = T - bisect.bisect_left(sorted_samples, threshold)
    return T ** (1.0 / (2.0 * b + 1.0)) * exceed / T


def estimate_c(samples, h_hat: float, b: float) -> float:
    """T^(1/(2b+1)) times the fraction of samples at or above T^(h_hat/(2b+1))."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("estimate_c needs at least one sample")
    if h_hat < 0:
        raise ValueError("h_hat must be >= 0")
    return c_from_sorted(np.sort(arr, kind="stable"), h_hat, b)


@dataclass(frozen=True)
class TailEstimate:
    h_hat: float
    c_hat: float
    T: int
    b: float

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("a tail estimate needs T >= 2 samples")
        if self.h_hat < 0 or self.c_hat < 0:
            raise ValueError("tail estimates are nonnegative")

    @property
    def alpha_hat(self) -> float:
        return math.inf if self.h_hat == 0 else 1.0 / self.h_hat


def estimate_tail(samples, b: float) -> TailEstimate:
    arr = np.asarray(samples, dtype=float)
    h = estimate_h(arr, b)
    return TailEstimate(h, estimate_c(arr, h, b), int(arr.size), b)


@dataclass(frozen=True)
class WidthParams:
    """Width constants D, E and the confidence level, stored as log(1/delta)."""

    D: float = 1.0
    E: float = 1.0
    log_inv_delta: float = math.log(20.0)

    def __post_init__(self):
        if not self.D > 0 or not self.E > 0:
            raise ValueError("width constants D and E must be > 0")
        if not self.log_inv_delta > 0:
            raise ValueError("delta must lie in (0, 1)")

    @classmethod
    def from_delta(cls, delta: float, D: float = 1.0, E: float = 1.0) -> "WidthParams":
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        return cls(D, E, -math.log(delta))

    @property
    def delta(self) -> float:
        """delta itself; underflows to 0.0 for very small values."""
        return math.exp(-self.log_inv_delta)


def width_b1(T: int, params: WidthParams, b: float) -> float:
    """D sqrt(log(1/delta)) T^(-b/(2b+1))."""
    if T < 1:
        raise ValueError("width needs T >= 1")
    return params.D * math.sqrt(params.log_inv_delta) * T ** (-b / (2.0 * b + 1.0))


def width_b2(T: int, params: WidthParams, b: float) -> float:
    """E sqrt(log(T/delta)) log(T) T^(-b/(2b+1))."""
    if T < 1:
        raise ValueError("width needs T >= 1")
    return (params.E * math.sqrt(math.log(T) + params.log_inv_delta) * math.log(T)
            * T ** (-b / (2.0 * b + 1.0)))
