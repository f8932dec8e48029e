#!/usr/bin/env python3
"""
Velocity and pressure on the periodic strip ]-1,1[ x ]-1,1[ with walls at x2 = +-1.

x1 is periodic with period 2 and sampled at N1 uniform points; x2 carries
N2 + 1 uniform nodes including both walls. Velocity lives on the nodes,
pressure on the N2 cell centers between them. Arrays are indexed [i1, j].
"""

from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from models.errors import InvalidInputError
from utils.parallel import fft_workers

CHANNEL_PERIOD = 2.0


@dataclass(frozen=True)
class ChannelGrid:
    """Fourier points in x1 times uniform finite-difference nodes in x2."""
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 4 or self.n1 % 2:
            raise InvalidInputError(f"channel n1 must be even and >= 4, got {self.n1}")
        if self.n2 < 4:
            raise InvalidInputError(f"channel n2 must be >= 4, got {self.n2}")

    @property
    def h1(self) -> float:
        return CHANNEL_PERIOD / self.n1

    @property
    def h2(self) -> float:
        return 2.0 / self.n2

    @property
    def node_shape(self) -> Tuple[int, int]:
        return (self.n1, self.n2 + 1)

    @property
    def cell_shape(self) -> Tuple[int, int]:
        return (self.n1, self.n2)

    def x1(self) -> np.ndarray:
        return -1.0 + self.h1 * np.arange(self.n1)

    def x2_nodes(self) -> np.ndarray:
        return -1.0 + self.h2 * np.arange(self.n2 + 1)

    def x2_cells(self) -> np.ndarray:
        return -1.0 + self.h2 * (np.arange(self.n2) + 0.5)

    def node_coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x1(), self.x2_nodes(), indexing='ij')

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers pi*m of the period-2 Fourier basis."""
        return math.pi * scipy.fft.fftfreq(self.n1, d=1.0 / self.n1)

    def dealias_mask(self) -> np.ndarray:
        m = np.abs(scipy.fft.fftfreq(self.n1, d=1.0 / self.n1))
        return m <= (self.n1 - 1) // 3

    def to_modes(self, values: np.ndarray) -> np.ndarray:
        """Fourier transform along x1 (axis -2)."""
        return scipy.fft.fft(values, axis=-2, workers=fft_workers())

    def to_grid(self, modes: np.ndarray) -> np.ndarray:
        return scipy.fft.ifft(modes, axis=-2, workers=fft_workers()).real

    def node_weights(self) -> np.ndarray:
        """Trapezoid weights in x2 times the uniform x1 spacing."""
        w = np.full(self.n2 + 1, self.h2)
        w[0] = w[-1] = 0.5 * self.h2
        return self.h1 * w

    def integrate_nodes(self, values: np.ndarray) -> float:
        return float(np.sum(values * self.node_weights()))

    def integrate_cells(self, values: np.ndarray) -> float:
        return float(np.sum(values) * self.h1 * self.h2)


class ChannelField:
    """
    Channel velocity (u1, u2) on nodes plus pressure on cell centers.

    Wall rows of the velocity are forced to zero on construction. Arrays
    are copied and made read-only, so instances are immutable snapshots.
    """

    def __init__(
        self,
        grid: ChannelGrid,
        velocity: np.ndarray,
        pressure: Optional[np.ndarray] = None,
        time: float = 0.0,
    ) -> None:
        u = np.array(velocity, dtype=float)
        if u.shape != (2,) + grid.node_shape:
            raise InvalidInputError(
                f"expected velocity shape {(2,) + grid.node_shape}, got {u.shape}"
            )
        if pressure is None:
            pi = np.zeros(grid.cell_shape)
        else:
            pi = np.array(pressure, dtype=float)
            if pi.shape != grid.cell_shape:
                raise InvalidInputError(
                    f"expected pressure shape {grid.cell_shape}, got {pi.shape}"
                )
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(pi))):
            raise InvalidInputError("channel field values must be finite")
        u[:, :, 0] = 0.0
        u[:, :, -1] = 0.0
        u.setflags(write=False)
        pi.setflags(write=False)
        self.grid = grid
        self.velocity = u
        self.pressure = pi
        self.time = float(time)
        self._modes: Optional[np.ndarray] = None

    @property
    def u1(self) -> np.ndarray:
        return self.velocity[0]

    @property
    def u2(self) -> np.ndarray:
        return self.velocity[1]

    @property
    def modes(self) -> np.ndarray:
        """x1-Fourier coefficients of the velocity, computed on first use."""
        if self._modes is None:
            modes = self.grid.to_modes(self.velocity)
            modes.setflags(write=False)
            self._modes = modes
        return self._modes

    @classmethod
    def zeros(cls, grid: ChannelGrid, time: float = 0.0) -> ChannelField:
        return cls(grid, np.zeros((2,) + grid.node_shape), time=time)

    def with_time(self, time: float) -> ChannelField:
        return ChannelField(self.grid, self.velocity, self.pressure, time)

    def max_speed(self) -> float:
        return float(np.max(np.hypot(self.velocity[0], self.velocity[1])))


@dataclass(frozen=True)
class D2StarField:
    """
    Second derivatives of a channel velocity except d22 u1.

    Mixed derivatives are stored once and counted twice in the squared
    norm, matching the full Hessian sum over (i, k).
    """
    d11_u1: np.ndarray
    d12_u1: np.ndarray
    d11_u2: np.ndarray
    d12_u2: np.ndarray
    d22_u2: np.ndarray

    def squared_magnitude(self) -> np.ndarray:
        return (self.d11_u1 ** 2 + 2.0 * self.d12_u1 ** 2
                + self.d11_u2 ** 2 + 2.0 * self.d12_u2 ** 2 + self.d22_u2 ** 2)

    def full_hessian_squared(self, d22_u1: np.ndarray) -> np.ndarray:
        """|D^2 u|^2 once the excluded component is supplied."""
        return self.squared_magnitude() + d22_u1 ** 2
