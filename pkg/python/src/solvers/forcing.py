#!/usr/bin/env python3
"""
Body forces: analytic fields or snapshot series, evaluated at a time.
"""

from __future__ import annotations
import logging
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from fields.snapshot_io import read_history, read_snapshot
from models.channel_field import ChannelField, ChannelGrid
from models.errors import InvalidInputError
from models.run_config import ForcingSpec
from models.torus_field import TorusField, TorusGrid
from models.velocity_history import VelocityHistory
from solvers.initial_data import resample_torus, shear, taylor_green

logger = logging.getLogger(__name__)


class Forcing:
    """
    Time-dependent body force.

    Torus forces are returned as spectral coefficients (2, N, N); channel
    forces as node values (2, N1, N2 + 1).
    """

    def __init__(
        self,
        evaluate: Callable[[float], np.ndarray],
        description: str,
        is_zero: bool = False,
        steady: bool = True,
    ) -> None:
        self._evaluate = evaluate
        self.description = description
        self.is_zero = is_zero
        self.steady = steady
        self._cached: Optional[np.ndarray] = None

    def at(self, t: float) -> np.ndarray:
        if self.steady:
            if self._cached is None:
                self._cached = self._evaluate(0.0)
            return self._cached
        return self._evaluate(t)

    @classmethod
    def constant(cls, values: np.ndarray, description: str) -> Forcing:
        frozen = np.array(values)
        frozen.setflags(write=False)
        return cls(lambda t: frozen, description, is_zero=not np.any(frozen))


def _series(
    history: VelocityHistory, convert: Callable[[Any], np.ndarray]
) -> Callable[[float], np.ndarray]:
    """Piecewise-linear in time between snapshots, held constant outside the span."""
    values = [convert(f) for f in history.fields]

    def evaluate(t: float) -> np.ndarray:
        t = min(max(t, history.start), history.end)
        i, theta = history.bracket(t)
        if theta == 0.0 or len(values) == 1:
            return values[i]
        return (1.0 - theta) * values[i] + theta * values[i + 1]

    return evaluate


def torus_forcing(spec: ForcingSpec, grid: TorusGrid) -> Forcing:
    """
    Build a torus body force.

    Raises:
        InvalidInputError: Unknown kind or a non-torus forcing file
    """
    if spec.kind == 'zero':
        zeros = np.zeros((2, grid.n, grid.n), dtype=complex)
        return Forcing.constant(zeros, 'zero')
    if spec.kind == 'kolmogorov':
        values = shear(grid, spec.amplitude, spec.wavenumber)
        description = f'kolmogorov(k={spec.wavenumber})'
        return Forcing.constant(grid.to_spectral(values), description)
    if spec.kind == 'taylor-green':
        values = taylor_green(grid, spec.amplitude)
        return Forcing.constant(grid.to_spectral(values), 'taylor-green')
    if spec.kind == 'file':
        if spec.path is None:
            raise InvalidInputError("file forcing needs a path")
        path = Path(spec.path)
        if path.is_dir():
            history = read_history(path)
            if history.geometry != 'torus':
                raise InvalidInputError(f"{path} does not hold torus snapshots")
            evaluate = _series(history, lambda f: resample_torus(f, grid).spectral)
            return Forcing(evaluate, f'series({path})', steady=False)
        field, _ = read_snapshot(path)
        if not isinstance(field, TorusField):
            raise InvalidInputError(f"{path} is not a torus snapshot")
        return Forcing.constant(resample_torus(field, grid).spectral, f'file({path})')
    raise InvalidInputError(f"unknown torus forcing kind {spec.kind!r}")


def channel_forcing(spec: ForcingSpec, grid: ChannelGrid) -> Forcing:
    """
    Build a channel body force.

    Raises:
        InvalidInputError: Unknown kind or a mismatched forcing file
    """
    if spec.kind == 'zero':
        return Forcing.constant(np.zeros((2,) + grid.node_shape), 'zero')
    if spec.kind == 'uniform':
        components = np.asarray(spec.components, dtype=float) * spec.amplitude
        values = components[:, None, None] * np.ones((2,) + grid.node_shape)
        description = f'uniform({components[0]:g}, {components[1]:g})'
        return Forcing.constant(values, description)
    if spec.kind == 'file':
        if spec.path is None:
            raise InvalidInputError("file forcing needs a path")
        path = Path(spec.path)
        if path.is_dir():
            history = read_history(path)
            if history.geometry != 'channel' or history.grid != grid:
                raise InvalidInputError(
                    f"{path} does not hold channel snapshots on this grid"
                )
            evaluate = _series(history, lambda f: np.asarray(f.velocity))
            return Forcing(evaluate, f'series({path})', steady=False)
        field, _ = read_snapshot(path)
        if not isinstance(field, ChannelField) or field.grid != grid:
            raise InvalidInputError(f"{path} is not a channel snapshot on this grid")
        return Forcing.constant(field.velocity, f'file({path})')
    raise InvalidInputError(f"unknown channel forcing kind {spec.kind!r}")
