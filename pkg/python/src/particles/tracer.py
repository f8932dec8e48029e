#!/usr/bin/env python3
"""
Particle trajectories dX/dt = u(X, t) by the classical Runge-Kutta method.

Steps never straddle a snapshot time: the velocity is only piecewise
linear in time, and aligning the steps with its kinks keeps the
fourth-order accuracy of the integrator.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from models.errors import InvalidInputError
from models.trajectory_bundle import BundleSpec, TrajectoryBundle
from models.velocity_history import VelocityHistory
from particles.interpolation import VelocityInterpolator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForwardBackwardResult:
    """
    Attributes:
        errors: (P,) |X_return - X(0)| per particle
        forward: Bundle traced from the start to the end of the history
    """
    errors: np.ndarray
    forward: TrajectoryBundle

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors))


def _breakpoints(history: VelocityHistory, t_from: float, t_to: float) -> np.ndarray:
    lo, hi = min(t_from, t_to), max(t_from, t_to)
    inside = history.times[(history.times > lo) & (history.times < hi)]
    return np.concatenate([[t_from], inside[::-1] if t_to < t_from else inside, [t_to]])


def _rk4_segment(
    velocity: VelocityInterpolator,
    positions: np.ndarray,
    t_from: float,
    t_to: float,
    dt_ode: float,
    geometry: str,
) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate from t_from to t_to (either direction) with steps of at most dt_ode."""
    x = positions
    clamped = np.zeros(len(x), dtype=bool)
    points = _breakpoints(velocity.history, t_from, t_to)
    for a, b in zip(points[:-1], points[1:]):
        span = b - a
        if span == 0.0:
            continue
        steps = max(1, int(math.ceil(abs(span) / dt_ode - 1e-9)))
        h = span / steps
        for i in range(steps):
            t = a + i * h
            k1, c1 = velocity(x, t)
            k2, c2 = velocity(x + 0.5 * h * k1, t + 0.5 * h)
            k3, c3 = velocity(x + 0.5 * h * k2, t + 0.5 * h)
            k4, c4 = velocity(x + h * k3, b if i == steps - 1 else t + h)
            x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            clamped |= c1 | c2 | c3 | c4
            if geometry == 'channel':
                outside = np.abs(x[:, 1]) > 1.0
                if np.any(outside):
                    clamped |= outside
                    x = x.copy()
                    x[:, 1] = np.clip(x[:, 1], -1.0, 1.0)
    return x, clamped


def _sample_times(
    history: VelocityHistory, spec: BundleSpec, dt_ode: float, t_end: Optional[float]
) -> np.ndarray:
    end = history.end if t_end is None else t_end
    if spec.sample_times is not None:
        times = np.asarray(spec.sample_times, dtype=float)
        increasing = bool(np.all(np.diff(times) > 0))
        if times[0] != history.start or not increasing or times[-1] > end + 1e-12:
            raise InvalidInputError(
                "sample times must start at the history start and "
                "increase within the span"
            )
        return times
    count = max(1, int(round((end - history.start) / dt_ode)))
    return np.linspace(history.start, end, count + 1)


def trace(
    history: VelocityHistory,
    spec: BundleSpec,
    dt_ode: float,
    scheme: str = 'spectral',
    t_end: Optional[float] = None,
) -> TrajectoryBundle:
    """
    Trace every particle of a bundle through a velocity history.

    Args:
        history: Snapshot series
        spec: Seed points, perturbation radius and optional sample times
        dt_ode: Largest Runge-Kutta step; must not exceed the snapshot spacing
        scheme: Torus spatial interpolation, 'spectral' or 'bicubic'
        t_end: Final time (default: end of the history)

    Returns:
        TrajectoryBundle with unwrapped paths, clamp flags and sampled velocities

    Raises:
        InvalidInputError: Non-positive dt_ode, dt_ode above the snapshot
            spacing, or times outside the history span
    """
    if not dt_ode > 0:
        raise InvalidInputError(f"dt_ode must be positive, got {dt_ode}")
    if dt_ode > history.min_spacing() * (1.0 + 1e-12):
        raise InvalidInputError(
            f"dt_ode {dt_ode} exceeds the snapshot spacing {history.min_spacing()}"
        )
    velocity = VelocityInterpolator(history, scheme)
    times = _sample_times(history, spec, dt_ode, t_end)
    x = spec.initial_positions()
    paths = np.empty((len(times),) + x.shape)
    velocities = np.empty_like(paths)
    clamped = np.zeros((len(times), len(x)), dtype=bool)
    paths[0] = x
    velocities[0], clamped[0] = velocity(x, times[0])
    for i in range(1, len(times)):
        x, flags = _rk4_segment(
            velocity, x, times[i - 1], times[i], dt_ode, history.geometry
        )
        paths[i] = x
        velocities[i], at_sample = velocity(x, times[i])
        clamped[i] = flags | at_sample
    if np.any(clamped):
        logger.warning(
            "%d particle sample(s) were clamped onto the channel walls",
            int(clamped.sum()),
        )
    logger.info(
        "Traced %d particles over [%.4g, %.4g] with dt_ode=%g",
        len(x),
        times[0],
        times[-1],
        dt_ode,
    )
    return TrajectoryBundle(
        times=times,
        paths=paths,
        cluster_ids=spec.cluster_ids(),
        eps=spec.eps,
        geometry=history.geometry,
        clamped=clamped,
        velocities=velocities,
        metadata={
            'interpolation': velocity.scheme,
            'dtOde': dt_ode,
            'timeInterpolation': 'linear',
        },
    )


def forward_backward_error(
    history: VelocityHistory, spec: BundleSpec, dt_ode: float, scheme: str = 'spectral'
) -> ForwardBackwardResult:
    """
    Trace from the start of the history to its end and back again.

    Returns:
        Per-particle return errors and the forward bundle
    """
    forward = trace(history, spec, dt_ode, scheme)
    velocity = VelocityInterpolator(history, scheme)
    returned, _ = _rk4_segment(
        velocity,
        forward.final_positions(),
        forward.times[-1],
        forward.times[0],
        dt_ode,
        history.geometry,
    )
    errors = np.linalg.norm(returned - forward.initial_positions, axis=-1)
    logger.info(
        "Forward-backward error: max %.3e at dt_ode=%g", float(np.max(errors)), dt_ode
    )
    return ForwardBackwardResult(errors=errors, forward=forward)
