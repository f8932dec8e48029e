#!/usr/bin/env python3
"""
Numeric helpers shared by the monitors, the particle diagnostics and the tests.
"""

from __future__ import annotations
import math
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid


class MathUtils:
    """
    Small numeric helpers for convergence studies and report summaries.
    """

    @staticmethod
    def safe_divide(
        numerator: float, denominator: float, default: float = 0.0
    ) -> float:
        """
        Divide, returning default when the denominator is zero.

        Args:
            numerator: Number to divide
            denominator: Number to divide by
            default: Value returned for a zero denominator

        Returns:
            Result of division or default value
        """
        if denominator == 0:
            return default
        return numerator / denominator

    @staticmethod
    def is_reasonable_number(
        value: Optional[float], min_value: float = -1e300, max_value: float = 1e300
    ) -> bool:
        """True for a finite number within [min_value, max_value]."""
        if value is None:
            return False
        try:
            return math.isfinite(value) and min_value <= value <= max_value
        except TypeError:
            return False

    @staticmethod
    def relative_change(
        previous: float, current: float, floor: float = 1e-300
    ) -> float:
        """
        |current - previous| / |previous|; 0 when both vanish, inf when only
        previous does.
        """
        if previous == current:
            return 0.0
        if abs(previous) <= floor:
            return math.inf
        return abs(current - previous) / abs(previous)

    @staticmethod
    def growth(previous: float, current: float, floor: float = 1e-300) -> float:
        """Signed relative growth (current - previous) / |previous|."""
        if previous == current:
            return 0.0
        if abs(previous) <= floor:
            return math.inf if current > previous else -math.inf
        return (current - previous) / abs(previous)

    @staticmethod
    def observed_order(errors: Sequence[float], steps: Sequence[float]) -> float:
        """
        Least-squares slope of log(error) against log(step).

        Args:
            errors: Errors at each step size, all positive
            steps: Step sizes, e.g. dt or h

        Returns:
            Observed convergence order

        Raises:
            ValueError: Fewer than two points or a non-positive entry
        """
        e = np.asarray(errors, dtype=float)
        h = np.asarray(steps, dtype=float)
        if len(e) < 2 or len(e) != len(h):
            raise ValueError("an order estimate needs at least two (error, step) pairs")
        if np.any(e <= 0) or np.any(h <= 0):
            raise ValueError("errors and steps must be positive")
        slope, _ = np.polyfit(np.log(h), np.log(e), 1)
        return float(slope)

    @staticmethod
    def trapezoid_integral(
        values: Sequence[float], times: Sequence[float], weighted: bool = False
    ) -> float:
        """Trapezoid of values, times t when weighted; 0 for a single sample."""
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if len(t) < 2:
            return 0.0
        return float(trapezoid(v * t if weighted else v, t))
