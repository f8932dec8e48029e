#!/usr/bin/env python3
"""
Stress-weighted regularity functionals on torus and channel fields.

With w = (delta + |Du|)^(p-2):
    I(u)  = integral w |grad Du|^2
    I1(u) = integral w |d1 Du|^2
    J(u)  = integral w |D u_t|^2
    M(u)  = integral M(|Du|)
Derivatives use each geometry's native differentiation; integrals use
the trapezoidal rule on the grid. Where delta = 0 and Du = 0 the weight
is taken as 0.
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np

from constitutive.stress_tensor import potential_grid, stress_grid, weight_grid
from fields import channel_calculus as cc
from fields.torus_calculus import sym_grad, sym_grad_derivative
from models.channel_field import ChannelField
from models.errors import DomainError
from models.stress_params import StressParams
from models.torus_field import TensorFieldGrid, TorusField

logger = logging.getLogger(__name__)

Field = Union[TorusField, ChannelField]


@dataclass(frozen=True)
class _Derivatives:
    D: TensorFieldGrid
    dD1: TensorFieldGrid
    dD2: TensorFieldGrid
    integrate: Callable[[np.ndarray], float]


def _map_tensor(
    D: TensorFieldGrid, op: Callable[[np.ndarray], np.ndarray]
) -> TensorFieldGrid:
    return TensorFieldGrid(op(D.d11), op(D.d12), op(D.d22))


def sym_grad_of(u: Field) -> TensorFieldGrid:
    if isinstance(u, TorusField):
        return sym_grad(u)
    return cc.sym_grad_nodes(u.velocity, u.grid)


def integrator_of(u: Field) -> Callable[[np.ndarray], float]:
    if isinstance(u, TorusField):
        return u.grid.integrate
    return u.grid.integrate_nodes


def _derivatives(u: Field) -> _Derivatives:
    if isinstance(u, TorusField):
        return _Derivatives(
            sym_grad(u),
            sym_grad_derivative(u, 0),
            sym_grad_derivative(u, 1),
            u.grid.integrate,
        )
    grid = u.grid
    D = cc.sym_grad_nodes(u.velocity, grid)
    return _Derivatives(
        D,
        _map_tensor(D, lambda c: cc.d1(c, grid)),
        _map_tensor(D, lambda c: cc.d2(c, grid)),
        grid.integrate_nodes,
    )


def functional_I(u: Field, params: StressParams) -> float:
    """Weighted full-gradient functional I(u)."""
    parts = _derivatives(u)
    w = weight_grid(parts.D.frobenius_norm(), params)
    density = parts.dD1.frobenius_norm() ** 2 + parts.dD2.frobenius_norm() ** 2
    return parts.integrate(w * density)


def functional_I1(u: Field, params: StressParams) -> float:
    """Weighted tangential functional I1(u); only d1 Du enters."""
    parts = _derivatives(u)
    w = weight_grid(parts.D.frobenius_norm(), params)
    return parts.integrate(w * parts.dD1.frobenius_norm() ** 2)


def functional_pair(u: Field, params: StressParams) -> Tuple[float, float]:
    """(I(u), I1(u)) sharing one set of derivatives."""
    parts = _derivatives(u)
    w = weight_grid(parts.D.frobenius_norm(), params)
    tangential = w * parts.dD1.frobenius_norm() ** 2
    full = tangential + w * parts.dD2.frobenius_norm() ** 2
    return parts.integrate(full), parts.integrate(tangential)


def functional_J(u: Field, u_t: Field, params: StressParams) -> float:
    """Weighted time-derivative functional J(u) for a supplied u_t."""
    w = weight_grid(sym_grad_of(u).frobenius_norm(), params)
    return integrator_of(u)(w * sym_grad_of(u_t).frobenius_norm() ** 2)


def functional_M(u: Field, params: StressParams) -> float:
    """
    Potential functional M(u) = integral of M(|Du|).

    The value is checked against 0 <= M(u) <= ||Du||_p^p / p, which holds
    for every delta >= 0 since the weight never exceeds |Du|^(p-2).

    Raises:
        DomainError: The quadrature leaves that range
    """
    norm = sym_grad_of(u).frobenius_norm()
    integrate = integrator_of(u)
    value = integrate(potential_grid(norm, params))
    bound = integrate(norm ** params.p) / params.p
    if value < 0 or value > bound * (1.0 + 1e-10) + 1e-300:
        raise DomainError(
            f"M(u) = {value:.6e} lies outside [0, ||Du||_p^p/p = {bound:.6e}]"
        )
    return value


def du_lp_norm(u: Field, exponent: float) -> float:
    density = sym_grad_of(u).frobenius_norm() ** exponent
    return integrator_of(u)(density) ** (1.0 / exponent)


def stress_power(u: Field, params: StressParams) -> float:
    """<S(Du), Du>, the stress dissipation rate."""
    D = sym_grad_of(u)
    return integrator_of(u)(stress_grid(D, params).contract(D))


def stress_rate_pairing(u: Field, u_t: Field, params: StressParams) -> float:
    """<S(Du), D u_t>, which equals dM(u)/dt for smooth evolutions."""
    S = stress_grid(sym_grad_of(u), params)
    return integrator_of(u)(S.contract(sym_grad_of(u_t)))
