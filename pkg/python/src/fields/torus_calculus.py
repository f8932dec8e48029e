#!/usr/bin/env python3
"""
Spectral calculus on the torus.

Every function consumes the spectral coefficients of its TorusField
arguments; grid values are produced by inverse transforms where a
pointwise nonlinearity or quadrature needs them. Nonlinear products are
formed from fields truncated at the alias-free cutoff and the results are
truncated again.
"""

from __future__ import annotations
import logging
import math
from typing import Optional, Union

import numpy as np

from constitutive.stress_tensor import stress_grid
from models.errors import InvalidInputError
from models.stress_params import StressParams
from models.torus_field import TensorFieldGrid, TorusField, TorusGrid

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (0, 1, 2)
# binomial weights of sum_j C(k, j) |grad^j u|^2
_BINOMIAL = {0: (1.0,), 1: (1.0, 1.0), 2: (1.0, 2.0, 1.0)}

FieldLike = Union[TorusField, np.ndarray]


def _coefficients(field: FieldLike, grid: Optional[TorusGrid] = None) -> np.ndarray:
    if isinstance(field, TorusField):
        return field.spectral
    coefficients = np.asarray(field, dtype=complex)
    if grid is not None and coefficients.shape != (2, grid.n, grid.n):
        raise InvalidInputError(
            f"expected spectral shape (2, {grid.n}, {grid.n}), "
            f"got {coefficients.shape}"
        )
    return coefficients


def spectral_derivative(
    coefficients: np.ndarray, grid: TorusGrid, axis: int
) -> np.ndarray:
    """Multiply by i*k along x1 (axis=0) or x2 (axis=1)."""
    k1, k2 = grid.wavenumbers()
    return 1j * (k1 if axis == 0 else k2) * coefficients


def velocity_gradient(u: TorusField) -> np.ndarray:
    """Grid values g[i, j] = d_j u_i, shape (2, 2, N, N)."""
    grid = u.grid
    hat = u.spectral
    rows = []
    for i in range(2):
        row = np.stack([spectral_derivative(hat[i], grid, j) for j in range(2)])
        rows.append(grid.to_physical(row))
    return np.stack(rows)


def sym_grad(u: TorusField) -> TensorFieldGrid:
    """
    Symmetric gradient Du = (grad u + grad u^T) / 2 on the grid.

    Args:
        u: Velocity field (spectral representation consumed)

    Returns:
        TensorFieldGrid with d11, d12, d22
    """
    g = velocity_gradient(u)
    return TensorFieldGrid(d11=g[0, 0], d12=0.5 * (g[0, 1] + g[1, 0]), d22=g[1, 1])


def sym_grad_derivative(u: TorusField, axis: int) -> TensorFieldGrid:
    """d_axis (Du) on the grid."""
    grid = u.grid
    shifted = spectral_derivative(u.spectral, grid, axis)
    return sym_grad(TorusField(grid, shifted))


def divergence(u: TorusField) -> np.ndarray:
    grid = u.grid
    hat = u.spectral
    total = spectral_derivative(hat[0], grid, 0) + spectral_derivative(hat[1], grid, 1)
    return grid.to_physical(total)


def leray_project(w: FieldLike, grid: Optional[TorusGrid] = None) -> TorusField:
    """
    Project onto divergence-free fields: u(k) = (I - k k^T / |k|^2) w(k).

    Args:
        w: Mean-zero field, as a TorusField or raw spectral array
        grid: Required when w is a raw array

    Returns:
        Solenoidal TorusField
    """
    if isinstance(w, TorusField):
        grid = w.grid
    if grid is None:
        raise InvalidInputError("leray_project needs a grid for raw spectral input")
    hat = _coefficients(w, grid)
    k1, k2 = grid.wavenumbers()
    k_sq = k1 ** 2 + k2 ** 2
    safe = np.where(k_sq > 0, k_sq, 1.0)
    k_dot = (k1 * hat[0] + k2 * hat[1]) / safe
    projected = np.stack([hat[0] - k1 * k_dot, hat[1] - k2 * k_dot])
    return TorusField(grid, projected, solenoidal=True)


def projection_defect(w: FieldLike, grid: Optional[TorusGrid] = None) -> float:
    """L2 norm of the gradient part removed by leray_project."""
    field = w if isinstance(w, TorusField) else TorusField(grid, _coefficients(w, grid))
    return l2_norm(field - leray_project(field))


def _parseval(hat: np.ndarray, grid: TorusGrid, symbol: np.ndarray) -> float:
    total = np.sum(symbol * np.abs(hat) ** 2)
    return float(total) * (2.0 * math.pi) ** 2 / grid.n ** 4


def l2_norm(u: TorusField) -> float:
    return math.sqrt(_parseval(u.spectral, u.grid, np.ones((u.n, u.n))))


def gradient_norm(u: TorusField) -> float:
    """||grad u||_2 by Parseval."""
    return math.sqrt(_parseval(u.spectral, u.grid, u.grid.k_squared()))


def hessian_norm(u: TorusField) -> float:
    """||grad^2 u||_2 by Parseval."""
    return math.sqrt(_parseval(u.spectral, u.grid, u.grid.k_squared() ** 2))


def _derivative_energy_density(u: TorusField, order: int) -> np.ndarray:
    """Pointwise sum over components and ordered multi-indices of |d^alpha u|^2."""
    grid = u.grid
    hat = u.spectral
    if order == 0:
        return np.sum(u.physical ** 2, axis=0)
    if order == 1:
        return np.sum(velocity_gradient(u) ** 2, axis=(0, 1))
    density = np.zeros((grid.n, grid.n))
    for a in range(2):
        for b in range(2):
            second = spectral_derivative(spectral_derivative(hat, grid, a), grid, b)
            density += np.sum(grid.to_physical(second) ** 2, axis=0)
    return density


def sobolev_norm(u: TorusField, order: int = 0, exponent: float = 2.0) -> float:
    """
    ||u||_{k,q} with the binomial-weighted derivative density.

    For q = 2 the Parseval form sum (1 + |k|^2)^order |u(k)|^2 is used;
    otherwise the density (sum_j C(order, j) |grad^j u|^2)^(q/2) is
    integrated by the trapezoidal rule.

    Raises:
        InvalidInputError: If order is not 0, 1 or 2, or q < 1
    """
    if order not in SUPPORTED_ORDERS:
        raise InvalidInputError(
            f"Sobolev order must be one of {SUPPORTED_ORDERS}, got {order}"
        )
    if not math.isfinite(exponent) or exponent < 1.0:
        raise InvalidInputError(
            f"Sobolev exponent must be a finite q >= 1, got {exponent}"
        )
    if exponent == 2.0:
        symbol = (1.0 + u.grid.k_squared()) ** order
        return math.sqrt(_parseval(u.spectral, u.grid, symbol))
    weights = _BINOMIAL[order]
    density = np.sum(
        [w * _derivative_energy_density(u, j) for j, w in enumerate(weights)], axis=0
    )
    return u.grid.integrate(density ** (exponent / 2.0)) ** (1.0 / exponent)


def lp_norm(values: np.ndarray, grid: TorusGrid, exponent: float) -> float:
    """(integral |values|^q)^(1/q) of a scalar grid function."""
    return grid.integrate(np.abs(values) ** exponent) ** (1.0 / exponent)


def sym_grad_lp_norm(D: TensorFieldGrid, grid: TorusGrid, exponent: float) -> float:
    return lp_norm(D.frobenius_norm(), grid, exponent)


def convection(u: TorusField, cutoff: Optional[int] = None) -> np.ndarray:
    """Spectral coefficients of (u . grad) u from truncated data, truncated again."""
    grid = u.grid
    mask = grid.truncation_mask(cutoff)
    v = TorusField(grid, u.spectral * mask)
    values = v.physical
    g = velocity_gradient(v)
    product = np.stack([values[0] * g[i, 0] + values[1] * g[i, 1] for i in range(2)])
    return grid.to_spectral(product) * mask


def stress_divergence(
    u: TorusField, params: StressParams, cutoff: Optional[int] = None
) -> np.ndarray:
    """Spectral coefficients of div S(Du), truncated at the cutoff."""
    grid = u.grid
    mask = grid.truncation_mask(cutoff)
    S = stress_grid(sym_grad(TorusField(grid, u.spectral * mask)), params)
    s11, s12, s22 = (grid.to_spectral(c) for c in (S.d11, S.d12, S.d22))
    div = np.stack([
        spectral_derivative(s11, grid, 0) + spectral_derivative(s12, grid, 1),
        spectral_derivative(s12, grid, 0) + spectral_derivative(s22, grid, 1),
    ])
    return div * mask


def momentum_rhs(
    u: TorusField,
    forcing: Optional[FieldLike],
    params: StressParams,
    cutoff: Optional[int] = None,
) -> np.ndarray:
    """nu0 Lap u + nu1 div S(Du) - (u . grad) u + f, spectral and unprojected."""
    grid = u.grid
    rhs = -params.nu0 * grid.k_squared() * u.spectral - convection(u, cutoff)
    if params.nu1 > 0:
        rhs = rhs + params.nu1 * stress_divergence(u, params, cutoff)
    if forcing is not None:
        rhs = rhs + _coefficients(forcing, grid)
    return rhs


def pressure_recover(
    u: TorusField,
    f: Optional[FieldLike],
    params: StressParams,
    cutoff: Optional[int] = None,
) -> np.ndarray:
    """
    Mean-zero pressure from -Lap pi = -div(momentum right-hand side).

    Args:
        u: Velocity field
        f: Body force (TorusField or spectral array), or None
        params: Constitutive constants
        cutoff: Galerkin cutoff used to truncate nonlinear terms

    Returns:
        Pressure grid values, shape (N, N)
    """
    grid = u.grid
    rhs = momentum_rhs(u, f, params, cutoff)
    k1, k2 = grid.wavenumbers()
    k_sq = grid.k_squared()
    safe = np.where(k_sq > 0, k_sq, 1.0)
    pressure_hat = np.where(k_sq > 0, -1j * (k1 * rhs[0] + k2 * rhs[1]) / safe, 0.0)
    return grid.to_physical(pressure_hat)


def max_speed(u: TorusField) -> float:
    values = u.physical
    return float(np.max(np.hypot(values[0], values[1])))
