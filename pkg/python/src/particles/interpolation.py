#!/usr/bin/env python3
"""
Evaluation of a velocity history at arbitrary points and times.

Space: exact Fourier mode sums on the torus (bicubic splines optional);
Fourier in x1 times cubic splines in x2 on the channel, with points beyond
the walls clamped onto them. Time: linear between snapshots.
"""

from __future__ import annotations
import logging
from typing import Dict, Tuple, Union

import numpy as np
import scipy.fft
from scipy.interpolate import CubicSpline, RectBivariateSpline

from models.channel_field import ChannelField
from models.errors import InvalidInputError
from models.torus_field import TORUS_LENGTH, TorusField
from models.velocity_history import VelocityHistory

logger = logging.getLogger(__name__)

SPATIAL_SCHEMES = ('spectral', 'bicubic')
# periodic padding around the torus grid for the bicubic splines
SPLINE_PAD = 3


class _TorusSpectral:
    def __init__(self, field: TorusField) -> None:
        self.coefficients = field.spectral / field.n ** 2
        self.k = scipy.fft.fftfreq(field.n, d=1.0 / field.n)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        e1 = np.exp(1j * np.outer(points[:, 0], self.k))
        e2 = np.exp(1j * np.outer(points[:, 1], self.k))
        return np.einsum('pa,cab,pb->pc', e1, self.coefficients, e2).real


class _TorusBicubic:
    def __init__(self, field: TorusField) -> None:
        n = field.n
        h = field.grid.spacing
        axis = h * np.arange(-SPLINE_PAD, n + SPLINE_PAD)
        index = np.mod(np.arange(-SPLINE_PAD, n + SPLINE_PAD), n)
        values = field.physical[:, index[:, None], index[None, :]]
        self.splines = [
            RectBivariateSpline(axis, axis, values[c], kx=3, ky=3, s=0)
            for c in range(2)
        ]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        wrapped = np.mod(points, TORUS_LENGTH)
        components = [s.ev(wrapped[:, 0], wrapped[:, 1]) for s in self.splines]
        return np.stack(components, axis=-1)


class _ChannelSpline:
    def __init__(self, field: ChannelField) -> None:
        grid = field.grid
        modes = field.modes / grid.n1
        # real and imaginary parts splined separately:
        # (2 parts, 2 components, n1, n2 + 1)
        parts = np.stack([modes.real, modes.imag])
        self.spline = CubicSpline(grid.x2_nodes(), parts, axis=-1)
        self.k = grid.wavenumbers()

    def __call__(self, points: np.ndarray) -> np.ndarray:
        parts = self.spline(points[:, 1])  # (2, 2, n1, P)
        coefficients = parts[0] + 1j * parts[1]
        phase = np.exp(1j * np.outer(points[:, 0] + 1.0, self.k))  # (P, n1)
        return np.einsum('cmp,pm->pc', coefficients, phase).real


PointEvaluator = Union[_TorusSpectral, _TorusBicubic, _ChannelSpline]


class VelocityInterpolator:
    """
    Velocity of a history at (x, t), with per-snapshot evaluators built once.

    Args:
        history: Snapshot series
        scheme: 'spectral' or 'bicubic' (torus only; the channel always
            uses Fourier times cubic splines)
    """

    def __init__(self, history: VelocityHistory, scheme: str = 'spectral') -> None:
        if scheme not in SPATIAL_SCHEMES:
            raise InvalidInputError(
                f"interpolation scheme must be one of {SPATIAL_SCHEMES}, got {scheme!r}"
            )
        self.history = history
        self.scheme = scheme if history.geometry == 'torus' else 'fourier-spline'
        self._evaluators: Dict[int, PointEvaluator] = {}

    def _evaluator(self, index: int) -> PointEvaluator:
        if index not in self._evaluators:
            field = self.history.fields[index]
            evaluator: PointEvaluator
            if not isinstance(field, TorusField):
                evaluator = _ChannelSpline(field)
            elif self.scheme == 'spectral':
                evaluator = _TorusSpectral(field)
            else:
                evaluator = _TorusBicubic(field)
            self._evaluators[index] = evaluator
        return self._evaluators[index]

    def __call__(self, points: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Velocities at the points and the channel clamp flags.

        Args:
            points: (P, 2) positions (unwrapped on the torus)
            t: Time within the history span

        Returns:
            ((P, 2) velocities, (P,) True where x2 was clamped onto a wall)

        Raises:
            InvalidInputError: If t lies outside the history span
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        clamped = np.zeros(len(pts), dtype=bool)
        if self.history.geometry == 'channel':
            clamped = np.abs(pts[:, 1]) > 1.0
            if np.any(clamped):
                pts = pts.copy()
                pts[:, 1] = np.clip(pts[:, 1], -1.0, 1.0)
                logger.debug(
                    "Clamped %d particle(s) onto the channel walls at t=%.6g",
                    int(clamped.sum()),
                    t,
                )
        i, theta = self.history.bracket(t)
        velocity = self._evaluator(i)(pts)
        if theta > 0.0:
            velocity = (1.0 - theta) * velocity + theta * self._evaluator(i + 1)(pts)
        return velocity + self.history.drift, clamped


def interpolate_velocity(
    history: VelocityHistory,
    x: Union[np.ndarray, Tuple[float, float]],
    t: float,
    scheme: str = 'spectral',
) -> np.ndarray:
    """
    Velocity u(x, t) of a history at one point.

    Args:
        history: Snapshot series
        x: Position (x1, x2)
        t: Time within the history span
        scheme: Torus spatial scheme, 'spectral' or 'bicubic'

    Returns:
        Velocity vector of shape (2,)

    Raises:
        InvalidInputError: If t lies outside the history span
    """
    point = np.asarray(x, dtype=float).reshape(1, 2)
    velocity, _ = VelocityInterpolator(history, scheme)(point, t)
    return velocity[0]
