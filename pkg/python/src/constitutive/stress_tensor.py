#!/usr/bin/env python3
"""
The power-law extra stress S(D) = (delta + |D|)^(p-2) D and its companions.

Scalar functions act on SymTensor2 values; the *_grid variants apply the
same law pointwise to TensorFieldGrid arrays for the solvers and monitors.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from models.errors import InvalidInputError, SingularPointError
from models.stress_params import StressParams, SymTensor2
from models.torus_field import TensorFieldGrid

logger = logging.getLogger(__name__)

# Below t = SMALL_T_RATIO * delta the closed form of M(t) cancels badly;
# its Taylor series is used there.
SMALL_T_RATIO = 1e-3
BOUND_SLACK = 1e-12

TensorLike = Union[SymTensor2, np.ndarray]


def _require_finite(*tensors: SymTensor2) -> None:
    for tensor in tensors:
        if not tensor.is_finite():
            raise InvalidInputError(f"tensor components must be finite, got {tensor}")


def _as_sym(value: TensorLike) -> SymTensor2:
    if isinstance(value, SymTensor2):
        return value
    return SymTensor2.from_matrix(value)


def stress_weight(norm: float, params: StressParams) -> float:
    """(delta + |D|)^(p-2), with 0 at the singular point where S vanishes anyway."""
    base = params.delta + norm
    if base == 0.0:
        return 0.0
    return base ** (params.p - 2.0)


def stress(D: SymTensor2, params: StressParams) -> SymTensor2:
    """
    Evaluate the extra stress tensor.

    Args:
        D: Symmetric velocity gradient
        params: Constitutive constants

    Returns:
        (delta + |D|)^(p-2) D; the zero tensor at delta = 0, D = 0

    Raises:
        InvalidInputError: If a component of D is not finite
    """
    _require_finite(D)
    return D.scaled(stress_weight(D.frobenius_norm, params))


def stress_jacobian(D: SymTensor2, params: StressParams) -> np.ndarray:
    """
    Analytic derivative dS_ij / dD_kl as a (2, 2, 2, 2) array.

    Raises:
        SingularPointError: At delta = 0, D = 0 where the Jacobian does not exist
    """
    _require_finite(D)
    norm = D.frobenius_norm
    base = params.delta + norm
    if base == 0.0:
        raise SingularPointError("stress Jacobian is undefined at delta = 0, D = 0")
    w = base ** (params.p - 2.0)
    eye = np.eye(2)
    jac = w * np.einsum('ik,jl->ijkl', eye, eye)
    if norm > 0.0:
        d = D.as_matrix()
        scale = (params.p - 2.0) * base ** (params.p - 3.0) / norm
        jac = jac + scale * np.einsum('ij,kl->ijkl', d, d)
    return jac


def stress_directional_derivative(
    D: SymTensor2, C: SymTensor2, params: StressParams
) -> Tuple[float, bool]:
    """
    Quadratic form of the stress Jacobian and its two-sided bounds.

    The form is sum dS_ij/dD_kl C_ij C_kl. The flag is True when the form
    dominates (p-1) w |C|^2 and every Jacobian entry is at most (3-p) w in
    magnitude, with w = (delta + |D|)^(p-2).

    Returns:
        (quadratic_form, operator_bound_ok)

    Raises:
        SingularPointError: At delta = 0, D = 0
    """
    _require_finite(D, C)
    jac = stress_jacobian(D, params)
    c = C.as_matrix()
    quadratic_form = float(np.einsum('ijkl,ij,kl->', jac, c, c))
    w = stress_weight(D.frobenius_norm, params)
    c_sq = C.frobenius_norm ** 2
    scale = max(1.0, abs(quadratic_form))
    coercive = quadratic_form >= (params.p - 1.0) * w * c_sq - BOUND_SLACK * scale
    bounded = float(np.max(np.abs(jac))) <= (3.0 - params.p) * w * (1.0 + BOUND_SLACK)
    return quadratic_form, bool(coercive and bounded)


@dataclass(frozen=True)
class MonotonicityBracket:
    """
    Quantities compared by the monotonicity estimate.

    Attributes:
        lhs_dot: (S(A) - S(B)) : (A_sym - B_sym)
        lhs_norm: |S(A) - S(B)|
        equivalent: (delta + |A_sym| + |B_sym|)^(p-2) |A_sym - B_sym|^2
        equivalent_norm: (delta + |A_sym| + |B_sym|)^(p-2) |A_sym - B_sym|
    """
    lhs_dot: float
    lhs_norm: float
    equivalent: float
    equivalent_norm: float

    def ratios(self) -> Tuple[float, float]:
        """(lhs_dot / equivalent, lhs_norm / equivalent_norm); NaN for a zero scale."""
        dot = math.nan
        if self.equivalent > 0:
            dot = self.lhs_dot / self.equivalent
        norm = math.nan
        if self.equivalent_norm > 0:
            norm = self.lhs_norm / self.equivalent_norm
        return dot, norm


def monotonicity_bracket(
    A: TensorLike, B: TensorLike, params: StressParams
) -> MonotonicityBracket:
    """
    Evaluate both sides of the monotonicity estimate for a pair of tensors.

    A and B may be full 2x2 matrices; only their symmetric parts enter.
    Callers check c0 * equivalent <= lhs <= c1 * equivalent.
    """
    a = _as_sym(A)
    b = _as_sym(B)
    _require_finite(a, b)
    diff = a - b
    stress_diff = stress(a, params) - stress(b, params)
    diff_norm = diff.frobenius_norm
    if diff_norm == 0.0:
        return MonotonicityBracket(0.0, 0.0, 0.0, 0.0)
    weight = (params.delta + a.frobenius_norm + b.frobenius_norm) ** (params.p - 2.0)
    return MonotonicityBracket(
        lhs_dot=stress_diff.dot(diff),
        lhs_norm=stress_diff.frobenius_norm,
        equivalent=weight * diff_norm ** 2,
        equivalent_norm=weight * diff_norm,
    )


def potential_scalar(t: float, params: StressParams) -> float:
    """
    M(t) = integral over [0, t] of (delta + s)^(p-2) s ds, in closed form.

    Raises:
        InvalidInputError: If t is negative or not finite
    """
    if not math.isfinite(t) or t < 0:
        raise InvalidInputError(f"potential argument must be a finite t >= 0, got {t}")
    return float(potential_grid(np.asarray(t, dtype=float), params))


def potential_grid(t: np.ndarray, params: StressParams) -> np.ndarray:
    """Vectorized M(t) for t >= 0."""
    p, delta = params.p, params.delta
    t = np.asarray(t, dtype=float)
    if delta == 0.0:
        return t ** p / p
    s = delta + t
    offset = delta ** p / p - delta ** p / (p - 1.0)
    closed = (s ** p / p - delta * s ** (p - 1.0) / (p - 1.0)) - offset
    x = t / delta
    series = delta ** p * (
        x ** 2 / 2.0
        + (p - 2.0) * x ** 3 / 3.0
        + (p - 2.0) * (p - 3.0) * x ** 4 / 8.0
    )
    return np.where(x < SMALL_T_RATIO, series, closed)


def weight_grid(norm: np.ndarray, params: StressParams) -> np.ndarray:
    """Pointwise (delta + |D|)^(p-2), zero where delta + |D| = 0."""
    base = params.delta + norm
    safe = np.where(base > 0.0, base, 1.0)
    return np.where(base > 0.0, safe ** (params.p - 2.0), 0.0)


def stress_grid(D: TensorFieldGrid, params: StressParams) -> TensorFieldGrid:
    """Pointwise S(D) on a tensor grid."""
    return D.scaled(weight_grid(D.frobenius_norm(), params))


def stress_components(
    d11: np.ndarray, d12: np.ndarray, d22: np.ndarray, params: StressParams
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise S on raw component arrays; used by the sampling estimators."""
    w = weight_grid(np.sqrt(d11 ** 2 + 2.0 * d12 ** 2 + d22 ** 2), params)
    return w * d11, w * d12, w * d22
