#!/usr/bin/env python3
"""
Sampling estimators for the constants of the stress inequalities.

The constants are not known in closed form, so they are measured by
brute-force sampling with a seeded generator. Entries of the random
matrices are drawn uniformly from [-5, 5].
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from constitutive.stress_tensor import potential_grid, stress_components, weight_grid
from models.errors import DomainError
from models.stress_params import StressParams

logger = logging.getLogger(__name__)

SAMPLE_LOW = -5.0
SAMPLE_HIGH = 5.0


@dataclass(frozen=True)
class RatioBand:
    """Smallest and largest sampled ratio."""
    lower: float
    upper: float
    samples: int

    def to_dict(self) -> Dict[str, float]:
        return {'lower': self.lower, 'upper': self.upper, 'samples': self.samples}


@dataclass(frozen=True)
class MonotonicityConstants:
    """
    Empirical constants of the monotonicity estimate.

    Attributes:
        dot: Band of (S(A)-S(B)):(A-B) over (delta+|A|+|B|)^(p-2)|A-B|^2
        norm: Band of |S(A)-S(B)| over (delta+|A|+|B|)^(p-2)|A-B|
    """
    dot: RatioBand
    norm: RatioBand

    @property
    def c0(self) -> float:
        return self.dot.lower

    @property
    def c1(self) -> float:
        return max(self.dot.upper, self.norm.upper)


def _random_symmetric(
    rng: np.random.Generator, count: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    full = rng.uniform(SAMPLE_LOW, SAMPLE_HIGH, size=(count, 2, 2))
    return full[:, 0, 0], 0.5 * (full[:, 0, 1] + full[:, 1, 0]), full[:, 1, 1]


def monotonicity_constants(
    params: StressParams, samples: int = 100_000, seed: int = 0
) -> MonotonicityConstants:
    """
    Sample random tensor pairs and bracket the monotonicity ratios.

    Args:
        params: Constitutive constants
        samples: Number of (A, B) pairs
        seed: Generator seed

    Returns:
        MonotonicityConstants with the observed ratio bands
    """
    rng = np.random.default_rng(seed)
    a = _random_symmetric(rng, samples)
    b = _random_symmetric(rng, samples)
    sa = stress_components(*a, params)
    sb = stress_components(*b, params)

    diff = [x - y for x, y in zip(a, b)]
    sdiff = [x - y for x, y in zip(sa, sb)]
    diff_norm = np.sqrt(diff[0] ** 2 + 2.0 * diff[1] ** 2 + diff[2] ** 2)
    sdiff_norm = np.sqrt(sdiff[0] ** 2 + 2.0 * sdiff[1] ** 2 + sdiff[2] ** 2)
    dot = sdiff[0] * diff[0] + 2.0 * sdiff[1] * diff[1] + sdiff[2] * diff[2]
    norm_a = np.sqrt(a[0] ** 2 + 2.0 * a[1] ** 2 + a[2] ** 2)
    norm_b = np.sqrt(b[0] ** 2 + 2.0 * b[1] ** 2 + b[2] ** 2)
    weight = weight_grid(norm_a + norm_b, params)

    keep = diff_norm > 0.0
    dot_ratio = dot[keep] / (weight[keep] * diff_norm[keep] ** 2)
    norm_ratio = sdiff_norm[keep] / (weight[keep] * diff_norm[keep])
    count = int(keep.sum())
    result = MonotonicityConstants(
        dot=RatioBand(float(dot_ratio.min()), float(dot_ratio.max()), count),
        norm=RatioBand(float(norm_ratio.min()), float(norm_ratio.max()), count),
    )
    logger.debug(
        "Monotonicity constants p=%s delta=%s: c0=%.4g c1=%.4g",
        params.p,
        params.delta,
        result.c0,
        result.c1,
    )
    return result


def relation_band(
    p: float, samples: int = 10_000, seed: int = 0, upper: float = 10.0
) -> RatioBand:
    """
    Band of (delta^(p/2) + t^(p/2)) / ((delta + t)^((p-2)/2) t + delta^(p/2)).

    (delta, t) are sampled uniformly from [0, upper]^2; the two sides are
    equivalent with constants depending only on p.

    Raises:
        DomainError: If p is outside (1, 2]
    """
    if not 1.0 < p <= 2.0:
        raise DomainError(f"p must lie in (1, 2], got {p}")
    rng = np.random.default_rng(seed)
    delta = rng.uniform(0.0, upper, size=samples)
    t = rng.uniform(0.0, upper, size=samples)
    keep = (delta + t) > 0.0
    delta, t = delta[keep], t[keep]
    numerator = delta ** (p / 2.0) + t ** (p / 2.0)
    denominator = (delta + t) ** ((p - 2.0) / 2.0) * t + delta ** (p / 2.0)
    ratio = numerator / denominator
    return RatioBand(float(ratio.min()), float(ratio.max()), int(keep.sum()))


def potential_bound_constant(
    params: StressParams, samples: int = 10_000, seed: int = 0, upper: float = 10.0
) -> float:
    """
    Largest sampled M(t) / t^p over t in (0, upper].

    At delta = 0 the ratio is exactly 1/p; for delta > 0 the weight only
    decreases, so 1/p bounds every sample.
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, upper, size=samples)
    t = t[t > 0.0]
    return float(np.max(potential_grid(t, params) / t ** params.p))
