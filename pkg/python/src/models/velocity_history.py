#!/usr/bin/env python3
"""
VelocityHistory: ordered velocity snapshots for particle tracing.
"""

from __future__ import annotations
from typing import List, Sequence, Tuple, Union

import numpy as np

from models.channel_field import ChannelField, ChannelGrid
from models.errors import InvalidInputError
from models.torus_field import TorusField, TorusGrid

Field = Union[TorusField, ChannelField]


class VelocityHistory:
    """
    Snapshots (t_i, u_i) with strictly increasing times on one grid.

    drift is a constant background velocity added to every snapshot; it
    lets a history describe a uniformly moving frame, which the mean-zero
    torus fields and the no-slip channel fields cannot represent.
    """

    def __init__(
        self,
        times: Sequence[float],
        fields: Sequence[Field],
        drift: Sequence[float] = (0.0, 0.0),
    ) -> None:
        if len(times) != len(fields) or len(times) == 0:
            raise InvalidInputError(
                "a velocity history needs one field per time and at least one snapshot"
            )
        t = np.asarray(times, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("snapshot times must be strictly increasing")
        first = fields[0]
        geometry = 'torus' if isinstance(first, TorusField) else 'channel'
        for f in fields:
            if type(f) is not type(first) or f.grid != first.grid:
                raise InvalidInputError(
                    "all snapshots must share geometry and resolution"
                )
        self.times = t
        self.fields: List[Field] = list(fields)
        self.geometry = geometry
        self.drift = np.asarray(drift, dtype=float)
        if self.drift.shape != (2,) or not np.all(np.isfinite(self.drift)):
            raise InvalidInputError(f"drift must be a finite 2-vector, got {drift}")

    @classmethod
    def frozen(
        cls, field: Field, t_end: float, drift: Sequence[float] = (0.0, 0.0)
    ) -> VelocityHistory:
        """A time-independent history on [0, t_end]."""
        if t_end <= 0:
            raise InvalidInputError(f"frozen history needs t_end > 0, got {t_end}")
        return cls([0.0, t_end], [field, field], drift)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def grid(self) -> Union[TorusGrid, ChannelGrid]:
        return self.fields[0].grid

    def min_spacing(self) -> float:
        if len(self.times) < 2:
            return float('inf')
        return float(np.min(np.diff(self.times)))

    def bracket(self, t: float) -> Tuple[int, float]:
        """
        Index i and weight theta with t = (1 - theta) t_i + theta t_{i+1}.

        Raises:
            InvalidInputError: If t lies outside the history span
        """
        tol = 1e-12 * max(1.0, abs(self.end))
        if t < self.start - tol or t > self.end + tol:
            raise InvalidInputError(
                f"time {t} outside history span [{self.start}, {self.end}]"
            )
        if len(self.times) == 1:
            return 0, 0.0
        i = int(np.searchsorted(self.times, t, side='right')) - 1
        i = min(max(i, 0), len(self.times) - 2)
        theta = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        return i, float(min(max(theta, 0.0), 1.0))
