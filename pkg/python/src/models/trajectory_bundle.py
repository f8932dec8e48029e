#!/usr/bin/env python3
"""
Particle bundles: what to trace and what came out.
"""

from __future__ import annotations
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from models.errors import InvalidInputError
from models.torus_field import TORUS_LENGTH


@dataclass(frozen=True)
class BundleSpec:
    """
    Seed points and their epsilon-perturbations.

    Each base point becomes a cluster: the point itself plus `perturbations`
    companions on the circle of radius eps around it, at equally spaced angles.

    Attributes:
        base_points: (P, 2) array of seed positions
        eps: Perturbation radius
        perturbations: Companions per base point
        sample_times: Output times, starting at 0
    """
    base_points: np.ndarray
    eps: float = 0.0
    perturbations: int = 0
    sample_times: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        points = np.atleast_2d(np.asarray(self.base_points, dtype=float))
        if points.ndim != 2 or points.shape[1] != 2 or len(points) == 0:
            raise InvalidInputError(
                f"base points must have shape (P, 2), got {points.shape}"
            )
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("base points must be finite")
        if self.eps < 0 or self.perturbations < 0:
            raise InvalidInputError("eps and perturbations must be non-negative")
        object.__setattr__(self, 'base_points', points)

    def initial_positions(self) -> np.ndarray:
        clusters = []
        for point in self.base_points:
            members = [point]
            for j in range(self.perturbations):
                angle = 2.0 * math.pi * j / self.perturbations
                offset = np.array([math.cos(angle), math.sin(angle)])
                members.append(point + self.eps * offset)
            clusters.extend(members)
        return np.array(clusters)

    def cluster_ids(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.base_points)), self.perturbations + 1)


@dataclass
class TrajectoryBundle:
    """
    Traced particle paths.

    Attributes:
        times: (M,) sample times, times[0] = 0
        paths: (M, P, 2) unwrapped positions (continuous lift on the torus)
        cluster_ids: (P,) cluster of each particle
        eps: Perturbation radius the bundle was seeded with
        geometry: 'torus' or 'channel'
        clamped: (M, P) True where the channel interpolator clamped x2
        velocities: (M, P, 2) interpolated velocity at each sample
        metadata: Interpolation scheme, dt_ode and similar
    """
    times: np.ndarray
    paths: np.ndarray
    cluster_ids: np.ndarray
    eps: float
    geometry: str
    clamped: Optional[np.ndarray] = None
    velocities: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def particle_count(self) -> int:
        return int(self.paths.shape[1])

    @property
    def initial_positions(self) -> np.ndarray:
        return self.paths[0]

    def wrapped(self) -> np.ndarray:
        """Positions reduced to the fundamental cell; the channel paths unchanged."""
        if self.geometry == 'torus':
            return np.mod(self.paths, TORUS_LENGTH)
        wrapped = self.paths.copy()
        wrapped[..., 0] = np.mod(wrapped[..., 0] + 1.0, 2.0) - 1.0
        return wrapped

    def final_positions(self) -> np.ndarray:
        return self.paths[-1]

    def to_records(self) -> List[Dict[str, float]]:
        """One record per (time, particle), in trajectories.csv column order."""
        wrapped = self.wrapped()
        records = []
        for i, t in enumerate(self.times):
            for j in range(self.particle_count):
                records.append({
                    't': float(t),
                    'particle': j,
                    'x1': float(self.paths[i, j, 0]),
                    'x2': float(self.paths[i, j, 1]),
                    'wrapped_x1': float(wrapped[i, j, 0]),
                    'wrapped_x2': float(wrapped[i, j, 1]),
                })
        return records
