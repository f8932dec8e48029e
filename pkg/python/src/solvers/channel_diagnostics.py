#!/usr/bin/env python3
"""
Diagnostic decompositions of channel solutions.

All quantities are evaluated on the velocity nodes with spectral x1 and
finite-difference x2 derivatives. The x1 momentum balance is split as
alpha1 d22 u1 = -F1 - f1 + du1/dt + d1 pi, where alpha1 collects every
coefficient of d22 u1 and F1 the remaining terms.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from constitutive.stress_tensor import weight_grid
from fields import channel_calculus as cc
from models.channel_field import ChannelField, ChannelGrid, D2StarField
from models.errors import DomainError
from models.stress_params import StressParams
from models.torus_field import TensorFieldGrid

logger = logging.getLogger(__name__)

ALPHA_FLOOR = 1e-14


@dataclass(frozen=True)
class ChannelDerivatives:
    """First and second derivatives of a channel velocity, computed once."""
    grid: ChannelGrid
    u: np.ndarray
    d1u: np.ndarray
    d2u: np.ndarray
    d11u: np.ndarray
    d12u: np.ndarray
    d22u: np.ndarray

    @classmethod
    def of(cls, field: ChannelField) -> ChannelDerivatives:
        grid = field.grid
        u = np.asarray(field.velocity)
        d2u = cc.d2(u, grid)
        return cls(
            grid=grid,
            u=u,
            d1u=cc.d1(u, grid),
            d2u=d2u,
            d11u=cc.d11(u, grid),
            d12u=cc.d1(d2u, grid),
            d22u=cc.d22(u, grid),
        )

    def sym_grad(self) -> TensorFieldGrid:
        return TensorFieldGrid(
            d11=self.d1u[0],
            d12=0.5 * (self.d2u[0] + self.d1u[1]),
            d22=self.d2u[1],
        )

    def sym_grad_d1(self) -> TensorFieldGrid:
        """d1 (Du) from the second derivatives."""
        return TensorFieldGrid(
            d11=self.d11u[0],
            d12=0.5 * (self.d12u[0] + self.d11u[1]),
            d22=self.d12u[1],
        )

    def sym_grad_d2(self) -> TensorFieldGrid:
        return TensorFieldGrid(
            d11=self.d12u[0],
            d12=0.5 * (self.d22u[0] + self.d12u[1]),
            d22=self.d22u[1],
        )

    def convection(self) -> np.ndarray:
        return self.u[0] * self.d1u + self.u[1] * self.d2u


def _chain_factor(norm: np.ndarray, params: StressParams) -> np.ndarray:
    """(p - 2)(delta + |D|)^(p-3) / |D|, set to 0 where |D| = 0."""
    safe = np.where(norm > 0.0, norm, 1.0)
    factor = (params.p - 2.0) * (params.delta + safe) ** (params.p - 3.0) / safe
    return np.where(norm > 0.0, factor, 0.0)


def interior_mask(grid: ChannelGrid) -> np.ndarray:
    mask = np.ones(grid.node_shape)
    mask[:, 0] = 0.0
    mask[:, -1] = 0.0
    return mask


def _interior_l2(values: np.ndarray, grid: ChannelGrid) -> float:
    return math.sqrt(grid.integrate_nodes(values ** 2 * interior_mask(grid)))


def alpha1_field(
    u: ChannelField,
    params: StressParams,
    derivatives: Optional[ChannelDerivatives] = None,
) -> Tuple[np.ndarray, float]:
    """
    Coefficient of d22 u1 in the x1 momentum balance.

    alpha1 = nu0 + (nu1/2) w + nu1 (p-2)(delta+|Du|)^(p-3) (Du)_12^2 / |Du|
    with w = (delta + |Du|)^(p-2); the last term is 0 where Du = 0.

    Returns:
        (alpha1 node grid, minimum over the grid)

    Raises:
        DomainError: If p < 3/2, where alpha1 loses its lower bound
    """
    params.require_channel_range()
    der = derivatives or ChannelDerivatives.of(u)
    D = der.sym_grad()
    norm = D.frobenius_norm()
    alpha = (
        params.nu0
        + 0.5 * params.nu1 * weight_grid(norm, params)
        + params.nu1 * _chain_factor(norm, params) * D.d12 ** 2
    )
    return alpha, float(np.min(alpha))


def alpha1_lower_bound(
    u: ChannelField,
    params: StressParams,
    derivatives: Optional[ChannelDerivatives] = None,
) -> np.ndarray:
    """nu0 + nu1 (p - 3/2)(delta + |Du|)^(p-2), a pointwise lower bound of alpha1."""
    der = derivatives or ChannelDerivatives.of(u)
    norm = der.sym_grad().frobenius_norm()
    return params.nu0 + params.nu1 * (params.p - 1.5) * weight_grid(norm, params)


def f1_field(der: ChannelDerivatives, params: StressParams) -> np.ndarray:
    """Every viscous and stress term of the x1 balance except alpha1 d22 u1."""
    D = der.sym_grad()
    dD1 = der.sym_grad_d1()
    norm = D.frobenius_norm()
    w = weight_grid(norm, params)
    g = _chain_factor(norm, params)
    d11u1, d12u1, d12u2, d22u2 = der.d11u[0], der.d12u[0], der.d12u[1], der.d22u[1]
    stress_part = (
        w * d11u1
        + g * D.contract(dD1) * D.d11
        + 0.5 * w * d12u2
        + g * D.d12 * (D.d11 * d12u1 + D.d12 * d12u2 + D.d22 * d22u2)
    )
    return params.nu0 * d11u1 + params.nu1 * stress_part


def pressure_d1_nodes(pressure: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """d1 pi on the nodes; wall rows are zero."""
    out = np.zeros(grid.node_shape)
    out[:, 1:-1] = cc.d1(cc.interior_average(pressure), grid)
    return out


def pressure_d2_nodes(pressure: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    out = np.zeros(grid.node_shape)
    out[:, 1:-1] = cc.cell_difference(pressure, grid)
    return out


@dataclass(frozen=True)
class Recovery:
    """Recovered d22 u1 and its distance to direct differentiation on interior nodes."""
    recovered: np.ndarray
    direct: np.ndarray
    residual: float
    f1: np.ndarray


def recover_d22u1(
    u: ChannelField,
    pressure: np.ndarray,
    u_t: np.ndarray,
    forcing: np.ndarray,
    params: StressParams,
    derivatives: Optional[ChannelDerivatives] = None,
) -> Recovery:
    """
    Solve the x1 balance for d22 u1 and compare with the discrete derivative.

    Args:
        u: Velocity snapshot
        pressure: Cell-centered pressure at the same time
        u_t: Node values of du/dt (backward difference)
        forcing: Node values of the body force
        params: Constitutive constants

    Raises:
        DomainError: If p < 3/2 or alpha1 degenerates
    """
    der = derivatives or ChannelDerivatives.of(u)
    grid = u.grid
    alpha, alpha_min = alpha1_field(u, params, der)
    if alpha_min <= ALPHA_FLOOR:
        raise DomainError(
            f"alpha1 degenerates (min {alpha_min:.3e}); d22 u1 cannot be recovered"
        )
    f1 = f1_field(der, params)
    effective = forcing[0] - der.convection()[0]
    rhs = -f1 - effective + u_t[0] + pressure_d1_nodes(pressure, grid)
    recovered = rhs / alpha
    direct = der.d22u[0]
    residual = _interior_l2(recovered - direct, grid)
    return Recovery(recovered=recovered, direct=direct, residual=residual, f1=f1)


def d2_star(derivatives: ChannelDerivatives) -> D2StarField:
    der = derivatives
    return D2StarField(
        d11_u1=der.d11u[0],
        d12_u1=der.d12u[0],
        d11_u2=der.d11u[1],
        d12_u2=der.d12u[1],
        d22_u2=der.d22u[1],
    )


def f1_bound_ratio(
    u: ChannelField,
    params: StressParams,
    derivatives: Optional[ChannelDerivatives] = None,
) -> float:
    """
    max |F1| / ([nu0 + nu1 (p - 3/2) w] |D2+ u|) over interior nodes
    with |D2+ u| > 0.

    An empirical estimate of the constant in the F1 bound.
    """
    der = derivatives or ChannelDerivatives.of(u)
    f1 = f1_field(der, params)
    magnitude = np.sqrt(d2_star(der).squared_magnitude())
    scale = alpha1_lower_bound(u, params, der) * magnitude
    significant = scale > 1e-12 * max(1.0, float(np.max(scale)))
    keep = significant & (interior_mask(u.grid) > 0)
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(f1[keep]) / scale[keep]))


@dataclass(frozen=True)
class PressureDiagnostics:
    """
    Attributes:
        dp1_l2: ||d1 pi||_2
        dp2_l2: ||d2 pi||_2
        necas_ratio: ||d1 pi - mean||_2 / ||d1 G||_2 with grad pi = div G
        tangential_bound_ok: |d1 S(Du)| <= (3-p) w |d1 Du| at every node
    """
    dp1_l2: float
    dp2_l2: float
    necas_ratio: float
    tangential_bound_ok: bool


def pressure_gradient_diagnostics(
    u: ChannelField,
    pressure: np.ndarray,
    u_t: np.ndarray,
    forcing: np.ndarray,
    params: StressParams,
    derivatives: Optional[ChannelDerivatives] = None,
) -> PressureDiagnostics:
    """
    Pressure gradient norms and the divergence-form ratio.

    The momentum equation gives grad pi = div G with
    G = nu0 grad u + nu1 S(Du) - Q, where Q_i2 integrates
    q_i = du_i/dt + ((u . grad) u)_i - f_i from the lower wall and Q_i1 = 0.
    """
    der = derivatives or ChannelDerivatives.of(u)
    grid = u.grid
    dp1 = pressure_d1_nodes(pressure, grid)
    dp2 = pressure_d2_nodes(pressure, grid)
    mask = interior_mask(grid)

    D = der.sym_grad()
    norm = D.frobenius_norm()
    w = weight_grid(norm, params)
    q = u_t + der.convection() - forcing
    Q = cumulative_trapezoid(q, dx=grid.h2, axis=-1, initial=0.0)
    grad = np.stack([der.d1u, der.d2u], axis=1)  # grad[i, j] = d_j u_i
    S = [[w * D.d11, w * D.d12], [w * D.d12, w * D.d22]]
    d1G_sq = np.zeros(grid.node_shape)
    for i in range(2):
        for j in range(2):
            component = params.nu0 * grad[i, j] + params.nu1 * S[i][j]
            if j == 1:
                component = component - Q[i]
            d1G_sq += cc.d1(component, grid) ** 2
    weights = grid.node_weights() * mask
    interior_area = float(np.sum(weights))
    mean = float(np.sum(dp1 * weights)) / interior_area
    numerator = math.sqrt(float(np.sum((dp1 - mean) ** 2 * weights)))
    denominator = math.sqrt(grid.integrate_nodes(d1G_sq))
    if denominator == 0.0:
        ratio = 0.0 if numerator == 0.0 else math.inf
    else:
        ratio = numerator / denominator

    dD1 = der.sym_grad_d1()
    g = _chain_factor(norm, params)
    contracted = D.contract(dD1)
    d1S = TensorFieldGrid(
        d11=w * dD1.d11 + g * contracted * D.d11,
        d12=w * dD1.d12 + g * contracted * D.d12,
        d22=w * dD1.d22 + g * contracted * D.d22,
    )
    bound = (3.0 - params.p) * w * dD1.frobenius_norm()
    tangential_ok = bool(np.all(d1S.frobenius_norm() <= bound * (1.0 + 1e-12) + 1e-14))

    return PressureDiagnostics(
        dp1_l2=math.sqrt(grid.integrate_nodes(dp1 ** 2)),
        dp2_l2=math.sqrt(grid.integrate_nodes(dp2 ** 2)),
        necas_ratio=ratio,
        tangential_bound_ok=tangential_ok,
    )


@dataclass(frozen=True)
class ConvectiveEstimate:
    """||(u . grad) u||_2 against the Hoelder bound ||u||_4 ||grad u||_4."""
    conv_l2: float
    holder_bound: float


def convective_estimate(derivatives: ChannelDerivatives) -> ConvectiveEstimate:
    der = derivatives
    grid = der.grid
    conv = der.convection()
    u4 = grid.integrate_nodes((der.u[0] ** 2 + der.u[1] ** 2) ** 2) ** 0.25
    grad_sq = np.sum(der.d1u ** 2 + der.d2u ** 2, axis=0)
    g4 = grid.integrate_nodes(grad_sq ** 2) ** 0.25
    return ConvectiveEstimate(
        conv_l2=math.sqrt(grid.integrate_nodes(np.sum(conv ** 2, axis=0))),
        holder_bound=u4 * g4,
    )
