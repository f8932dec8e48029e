#!/usr/bin/env python3
"""
Constitutive parameters and the symmetric 2x2 tensor value type.
"""

from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from models.errors import DomainError, InvalidInputError

# Lower end of the p-range the channel (Dirichlet) estimates hold for.
CHANNEL_MIN_P = 1.5


@dataclass(frozen=True)
class StressParams:
    """
    Constants of the shear-thinning momentum equation.

    Attributes:
        p: Power-law exponent, 1 < p <= 2
        delta: Regularization of the stress law, delta >= 0
        nu0: Newtonian (Laplacian) viscosity
        nu1: Non-Newtonian viscosity multiplying div S(Du)
    """
    p: float
    delta: float
    nu0: float
    nu1: float

    def __post_init__(self) -> None:
        for name in ("p", "delta", "nu0", "nu1"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidInputError(
                    f"StressParams.{name} must be a finite number, got {value!r}"
                )
        if not 1.0 < self.p <= 2.0:
            raise DomainError(f"p must lie in (1, 2], got {self.p}")
        if self.delta < 0:
            raise DomainError(f"delta must be non-negative, got {self.delta}")
        if self.nu0 < 0 or self.nu1 < 0:
            raise DomainError(
                f"viscosities must be non-negative, got nu0={self.nu0}, nu1={self.nu1}"
            )

    @property
    def newtonian_viscosity(self) -> float:
        """Total viscosity of the p = 2 reduction: nu0 + nu1 / 2."""
        return self.nu0 + 0.5 * self.nu1

    def require_viscous(self) -> None:
        """Reject nu0 = 0, which only the explicit torus mode supports."""
        if self.nu0 <= 0:
            raise DomainError(
                "nu0 > 0 is required outside the explicit nu0 = 0 torus mode"
            )

    def require_channel_range(self) -> None:
        """Reject exponents outside [3/2, 2], where the Dirichlet estimates fail."""
        if self.p < CHANNEL_MIN_P:
            raise DomainError(
                f"the channel solver requires p >= 3/2 (got p={self.p}); "
                "below 3/2 the lower bound on alpha1 is lost"
            )

    def to_dict(self) -> Dict[str, float]:
        """Convert to dictionary format for JSON serialization."""
        return {'p': self.p, 'delta': self.delta, 'nu0': self.nu0, 'nu1': self.nu1}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> StressParams:
        """
        Create StressParams from a dictionary.

        Raises:
            InvalidInputError: If a required key is missing
        """
        missing = [key for key in ('p', 'delta', 'nu0', 'nu1') if key not in data]
        if missing:
            raise InvalidInputError(f"Missing stress parameters: {missing}")
        return cls(p=float(data['p']), delta=float(data['delta']),
                   nu0=float(data['nu0']), nu1=float(data['nu1']))


@dataclass(frozen=True)
class SymTensor2:
    """
    Symmetric 2x2 tensor stored by its upper triangle.

    The Frobenius norm counts the off-diagonal entry twice.
    """
    d11: float
    d12: float
    d22: float

    @property
    def frobenius_norm(self) -> float:
        return math.sqrt(self.d11 ** 2 + 2.0 * self.d12 ** 2 + self.d22 ** 2)

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in (self.d11, self.d12, self.d22))

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.d11, self.d12], [self.d12, self.d22]], dtype=float)

    def scaled(self, factor: float) -> SymTensor2:
        return SymTensor2(factor * self.d11, factor * self.d12, factor * self.d22)

    def dot(self, other: SymTensor2) -> float:
        """Full contraction A:B."""
        return self.d11 * other.d11 + 2.0 * self.d12 * other.d12 + self.d22 * other.d22

    def __sub__(self, other: SymTensor2) -> SymTensor2:
        return SymTensor2(
            self.d11 - other.d11, self.d12 - other.d12, self.d22 - other.d22
        )

    @classmethod
    def zero(cls) -> SymTensor2:
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> SymTensor2:
        """Symmetric part of an arbitrary 2x2 matrix."""
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2):
            raise InvalidInputError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1])
