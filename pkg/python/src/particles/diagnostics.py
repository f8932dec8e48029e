#!/usr/bin/env python3
"""
Separation diagnostics for traced bundles.

A velocity with modulus |u(x) - u(y)| <= L r (1 + log+(1/r)), r = |x - y|,
satisfies the Osgood condition, and two trajectories starting s0 apart stay
below the solution of ds/dt = L s (1 + log+(1/s)). The modulus is fitted on
the velocity differences sampled along the traced paths, which makes it a
lower estimate of the true one.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from models.errors import InvalidInputError
from models.trajectory_bundle import TrajectoryBundle
from utils.math_utils import MathUtils

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 2.0


def log_lipschitz_modulus(r: np.ndarray) -> np.ndarray:
    """r (1 + log+(1/r)), with value 0 at r = 0."""
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, r * (1.0 + np.maximum(np.log(1.0 / safe), 0.0)), 0.0)


def osgood_envelope(s0: float, constant: float, times: np.ndarray) -> np.ndarray:
    """
    Exact solution of ds/dt = L s (1 + log+(1/s)), s(0) = s0.

    Below s = 1, y = 1 + log(1/s) obeys dy/dt = -L y, so
    s(t) = exp(1 - (1 + log(1/s0)) e^{-L t}); once s reaches 1 the growth
    is exponential.
    """
    t = np.asarray(times, dtype=float) - float(np.asarray(times, dtype=float)[0])
    if s0 <= 0.0:
        return np.zeros_like(t)
    if constant <= 0.0:
        return np.full_like(t, s0)
    if s0 >= 1.0:
        return s0 * np.exp(constant * t)
    y0 = 1.0 + math.log(1.0 / s0)
    reach_one = math.log(y0) / constant
    below = np.exp(1.0 - y0 * np.exp(-constant * t))
    above = np.exp(constant * (t - reach_one))
    return np.where(t < reach_one, below, above)


def lipschitz_envelope(s0: float, constant: float, times: np.ndarray) -> np.ndarray:
    """s0 e^{L t}."""
    t = np.asarray(times, dtype=float) - float(np.asarray(times, dtype=float)[0])
    return s0 * np.exp(max(constant, 0.0) * t)


def _pairs(bundle: TrajectoryBundle) -> List[Tuple[int, int]]:
    ids = np.asarray(bundle.cluster_ids)
    everything = combinations(range(bundle.particle_count), 2)
    pairs = [(a, b) for a, b in everything if ids[a] == ids[b]]
    if not pairs:
        # singleton clusters: compare every particle with every other
        pairs = list(combinations(range(bundle.particle_count), 2))
    return pairs


@dataclass
class SeparationDiagnostics:
    """
    Attributes:
        times: Sample times
        separation: s(t), the largest distance between paired particles
        log_lipschitz_constant: Least-squares L of the log-Lipschitz modulus
        lipschitz_constant: Least-squares L of the plain Lipschitz modulus
        osgood: Osgood envelope at the sample times
        lipschitz: Gronwall envelope s0 e^{L t}
        margin: Factor allowed above the Osgood envelope
    """
    times: np.ndarray
    separation: np.ndarray
    log_lipschitz_constant: float
    lipschitz_constant: float
    osgood: np.ndarray
    lipschitz: np.ndarray
    margin: float = DEFAULT_MARGIN

    @property
    def within_envelope(self) -> bool:
        return bool(np.all(self.separation <= self.margin * self.osgood + 1e-300))

    def to_records(self) -> List[Dict[str, float]]:
        """Rows of diagnostics.csv."""
        return [
            {
                't': float(t),
                'max_separation': float(s),
                'envelope': float(e),
                'lipschitz_envelope': float(g),
            }
            for t, s, e, g in zip(
                self.times, self.separation, self.osgood, self.lipschitz
            )
        ]

    def summary(self) -> Dict[str, Any]:
        return {
            'logLipschitzConstant': self.log_lipschitz_constant,
            'lipschitzConstant': self.lipschitz_constant,
            'initialSeparation': float(self.separation[0]),
            'finalSeparation': float(self.separation[-1]),
            'withinEnvelope': self.within_envelope,
            'margin': self.margin,
        }


def separation_diagnostics(
    bundle: TrajectoryBundle, margin: float = DEFAULT_MARGIN
) -> SeparationDiagnostics:
    """
    Separation of paired particles against the fitted envelopes.

    Particles are paired within their perturbation cluster; a bundle of
    singleton clusters pairs every particle with every other.

    Raises:
        InvalidInputError: Fewer than two particles or no sampled velocities
    """
    if bundle.particle_count < 2:
        raise InvalidInputError("separation diagnostics need at least two particles")
    if bundle.velocities is None:
        raise InvalidInputError("the bundle carries no sampled velocities")
    pairs = _pairs(bundle)
    a, b = np.array(pairs).T
    # (M, pairs)
    distance = np.linalg.norm(bundle.paths[:, a] - bundle.paths[:, b], axis=-1)
    gaps = bundle.velocities[:, a] - bundle.velocities[:, b]
    velocity_gap = np.linalg.norm(gaps, axis=-1)
    separation = distance.max(axis=1)

    phi = log_lipschitz_modulus(distance)
    log_constant = MathUtils.safe_divide(
        float(np.sum(phi * velocity_gap)), float(np.sum(phi ** 2))
    )
    lip_constant = MathUtils.safe_divide(
        float(np.sum(distance * velocity_gap)), float(np.sum(distance ** 2))
    )
    s0 = float(separation[0])
    result = SeparationDiagnostics(
        times=np.asarray(bundle.times),
        separation=separation,
        log_lipschitz_constant=log_constant,
        lipschitz_constant=lip_constant,
        osgood=osgood_envelope(s0, log_constant, bundle.times),
        lipschitz=lipschitz_envelope(s0, lip_constant, bundle.times),
        margin=margin,
    )
    if not result.within_envelope:
        logger.warning(
            "Separation left the Osgood envelope (L=%.3g, margin %.1f)",
            log_constant,
            margin,
        )
    return result


def shoelace_area(polygon: np.ndarray) -> float:
    """Signed area of a polygon given as (V, 2) vertices in order."""
    x, y = np.asarray(polygon, dtype=float).T
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def area_drift(bundle: TrajectoryBundle, vertices: Sequence[int]) -> np.ndarray:
    """Relative change of the tracer polygon's area at each sample time."""
    index = list(vertices)
    if len(index) < 3:
        raise InvalidInputError("a tracer polygon needs at least three vertices")
    areas = np.array(
        [shoelace_area(bundle.paths[i, index]) for i in range(len(bundle.times))]
    )
    if areas[0] == 0.0:
        raise InvalidInputError("the initial tracer polygon is degenerate")
    return np.abs(areas - areas[0]) / abs(areas[0])
