#!/usr/bin/env python3
"""
Velocity fields on the 2*pi-periodic torus.

Grid arrays are indexed [i1, i2] with x1 = 2*pi*i1/N along axis 0 and
x2 = 2*pi*i2/N along axis 1. Spectral coefficients use the unnormalized
scipy.fft.fft2 convention on the same axes.
"""

from __future__ import annotations
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from models.errors import InvalidInputError
from utils.parallel import fft_workers

TORUS_LENGTH = 2.0 * math.pi


@lru_cache(maxsize=16)
def _wavenumbers(n: int) -> Tuple[np.ndarray, np.ndarray]:
    k = scipy.fft.fftfreq(n, d=1.0 / n)
    k1, k2 = np.meshgrid(k, k, indexing='ij')
    k1.setflags(write=False)
    k2.setflags(write=False)
    return k1, k2


def max_alias_free_cutoff(n: int) -> int:
    """Largest cutoff m with 3m < n: quadratic products never alias into kept modes."""
    return (n - 1) // 3


@dataclass(frozen=True)
class TorusGrid:
    """Uniform N x N grid on [0, 2*pi)^2 with its Fourier lattice."""
    n: int

    def __post_init__(self) -> None:
        if self.n < 4 or self.n % 2:
            raise InvalidInputError(
                f"torus resolution must be even and >= 4, got {self.n}"
            )

    @property
    def spacing(self) -> float:
        return TORUS_LENGTH / self.n

    @property
    def cell_area(self) -> float:
        return self.spacing ** 2

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(x, x, indexing='ij')

    def wavenumbers(self) -> Tuple[np.ndarray, np.ndarray]:
        return _wavenumbers(self.n)

    def k_squared(self) -> np.ndarray:
        k1, k2 = self.wavenumbers()
        return k1 ** 2 + k2 ** 2

    def truncation_mask(self, cutoff: Optional[int] = None) -> np.ndarray:
        """Modes with max(|k1|, |k2|) <= cutoff, by default the alias-free one."""
        m = max_alias_free_cutoff(self.n) if cutoff is None else cutoff
        k1, k2 = self.wavenumbers()
        return (np.abs(k1) <= m) & (np.abs(k2) <= m)

    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        return scipy.fft.fft2(values, axes=(-2, -1), workers=fft_workers())

    def to_physical(self, coefficients: np.ndarray) -> np.ndarray:
        return scipy.fft.ifft2(coefficients, axes=(-2, -1), workers=fft_workers()).real

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoidal rule over the torus, spectrally accurate for smooth data."""
        return float(np.sum(values, axis=(-2, -1)) * self.cell_area)


class TorusField:
    """
    Mean-zero velocity field (u1, u2) on the torus.

    The spectral coefficients are authoritative. The physical grid values
    are synchronized lazily on first access and cached; both arrays are
    read-only, so a field is an immutable snapshot.
    """

    def __init__(
        self, grid: TorusGrid, spectral: np.ndarray, solenoidal: bool = False
    ) -> None:
        coefficients = np.array(spectral, dtype=complex)
        if coefficients.shape != (2, grid.n, grid.n):
            raise InvalidInputError(
                f"expected spectral shape (2, {grid.n}, {grid.n}), "
                f"got {coefficients.shape}"
            )
        # zero mean and no Nyquist content, so i*k differentiation keeps reality
        coefficients[:, 0, 0] = 0.0
        half = grid.n // 2
        coefficients[:, half, :] = 0.0
        coefficients[:, :, half] = 0.0
        coefficients.setflags(write=False)
        self.grid = grid
        self.solenoidal = solenoidal
        self._spectral = coefficients
        self._physical: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def spectral(self) -> np.ndarray:
        return self._spectral

    @property
    def physical(self) -> np.ndarray:
        if self._physical is None:
            values = self.grid.to_physical(self._spectral)
            values.setflags(write=False)
            self._physical = values
        return self._physical

    @classmethod
    def from_physical(
        cls, grid: TorusGrid, values: np.ndarray, solenoidal: bool = False
    ) -> TorusField:
        array = np.asarray(values, dtype=float)
        if array.shape != (2, grid.n, grid.n):
            raise InvalidInputError(
                f"expected grid shape (2, {grid.n}, {grid.n}), got {array.shape}"
            )
        if not np.all(np.isfinite(array)):
            raise InvalidInputError("field values must be finite")
        return cls(grid, grid.to_spectral(array), solenoidal=solenoidal)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> TorusField:
        return cls(grid, np.zeros((2, grid.n, grid.n), dtype=complex), solenoidal=True)

    def truncated(self, cutoff: Optional[int] = None) -> TorusField:
        mask = self.grid.truncation_mask(cutoff)
        return TorusField(self.grid, self._spectral * mask, solenoidal=self.solenoidal)

    def __add__(self, other: TorusField) -> TorusField:
        solenoidal = self.solenoidal and other.solenoidal
        return TorusField(self.grid, self._spectral + other.spectral, solenoidal)

    def __sub__(self, other: TorusField) -> TorusField:
        solenoidal = self.solenoidal and other.solenoidal
        return TorusField(self.grid, self._spectral - other.spectral, solenoidal)

    def scaled(self, factor: float) -> TorusField:
        return TorusField(self.grid, factor * self._spectral, self.solenoidal)


@dataclass(frozen=True)
class TensorFieldGrid:
    """
    Pointwise symmetric 2x2 tensor field on a torus or channel grid.

    Components share the grid shape of the velocity they came from.
    """
    d11: np.ndarray
    d12: np.ndarray
    d22: np.ndarray

    def frobenius_norm(self) -> np.ndarray:
        return np.sqrt(self.d11 ** 2 + 2.0 * self.d12 ** 2 + self.d22 ** 2)

    def trace(self) -> np.ndarray:
        return self.d11 + self.d22

    def contract(self, other: TensorFieldGrid) -> np.ndarray:
        return self.d11 * other.d11 + 2.0 * self.d12 * other.d12 + self.d22 * other.d22

    def scaled(self, weight: np.ndarray) -> TensorFieldGrid:
        return TensorFieldGrid(weight * self.d11, weight * self.d12, weight * self.d22)
