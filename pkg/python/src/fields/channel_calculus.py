#!/usr/bin/env python3
"""
Discrete calculus on the channel grid.

x1 derivatives are spectral (the Nyquist mode is dropped); x2 derivatives
are second-order finite differences, centered inside and one-sided on the
wall rows. Staggered operators couple node velocities with cell-centered
pressures for the projection step.
"""

from __future__ import annotations
import logging
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from models.channel_field import ChannelGrid
from models.torus_field import TensorFieldGrid

logger = logging.getLogger(__name__)


def _x1_symbol(grid: ChannelGrid) -> np.ndarray:
    k = grid.wavenumbers()
    k[grid.n1 // 2] = 0.0
    return k


def d1(values: np.ndarray, grid: ChannelGrid, dealias: bool = False) -> np.ndarray:
    """Spectral d/dx1 along axis -2."""
    symbol = 1j * _x1_symbol(grid)
    if dealias:
        symbol = symbol * grid.dealias_mask()
    return grid.to_grid(symbol[:, None] * grid.to_modes(values))


def d11(values: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    k = _x1_symbol(grid)
    return grid.to_grid(-(k ** 2)[:, None] * grid.to_modes(values))


def d2(values: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """Second-order d/dx2 on nodes, one-sided at the walls."""
    return np.gradient(values, grid.h2, axis=-1, edge_order=2)


def d22(values: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """Three-point second derivative inside, four-point one-sided at the walls."""
    h2 = grid.h2 ** 2
    out = np.empty_like(values)
    out[..., 1:-1] = (values[..., 2:] - 2.0 * values[..., 1:-1] + values[..., :-2]) / h2
    lower = values[..., :4]
    upper = values[..., :-5:-1]
    out[..., 0] = (
        2.0 * lower[..., 0] - 5.0 * lower[..., 1] + 4.0 * lower[..., 2] - lower[..., 3]
    ) / h2
    out[..., -1] = (
        2.0 * upper[..., 0] - 5.0 * upper[..., 1] + 4.0 * upper[..., 2] - upper[..., 3]
    ) / h2
    return out


def dealias(values: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """Drop x1 modes above the two-thirds cutoff."""
    return grid.to_grid(grid.dealias_mask()[:, None] * grid.to_modes(values))


def cell_average(values: np.ndarray) -> np.ndarray:
    """Node values to cell centers."""
    return 0.5 * (values[..., 1:] + values[..., :-1])


def cell_difference(values: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """d/dx2 of node values evaluated at cell centers."""
    return (values[..., 1:] - values[..., :-1]) / grid.h2


def interior_average(cells: np.ndarray) -> np.ndarray:
    """Cell values to interior nodes 1..N2-1."""
    return 0.5 * (cells[..., 1:] + cells[..., :-1])


def sym_grad_nodes(velocity: np.ndarray, grid: ChannelGrid) -> TensorFieldGrid:
    """Du on the nodes from spectral x1 and finite-difference x2 derivatives."""
    u1, u2 = velocity
    return TensorFieldGrid(
        d11=d1(u1, grid),
        d12=0.5 * (d2(u1, grid) + d1(u2, grid)),
        d22=d2(u2, grid),
    )


def sym_grad_cells(
    velocity: np.ndarray, grid: ChannelGrid, dealiased: bool = True
) -> TensorFieldGrid:
    """Du at cell centers; x2 derivatives are compact differences across the cell."""
    u1, u2 = velocity
    d1u2 = cell_average(d1(u2, grid, dealias=dealiased))
    return TensorFieldGrid(
        d11=cell_average(d1(u1, grid, dealias=dealiased)),
        d12=0.5 * (cell_difference(u1, grid) + d1u2),
        d22=cell_difference(u2, grid),
    )


def staggered_divergence(velocity: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """Cell-centered divergence d1 u1 + d2 u2 used by the projection."""
    return cell_average(d1(velocity[0], grid)) + cell_difference(velocity[1], grid)


def pressure_gradient(pressure: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """
    Gradient of a cell-centered pressure at the nodes.

    Wall rows are zero: the velocity there is prescribed and never updated.
    """
    gradient = np.zeros((2,) + grid.node_shape)
    gradient[0, :, 1:-1] = d1(interior_average(pressure), grid)
    gradient[1, :, 1:-1] = cell_difference(pressure, grid)
    return gradient


def solve_pressure_poisson(rhs: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """
    Solve D G phi = rhs for a mean-zero cell pressure, one tridiagonal
    system per x1 mode.

    Where the x1 symbol vanishes (k = 0 and the dropped Nyquist mode) the
    system is the Neumann Laplacian in x2; it is closed by pinning the first
    cell, which is consistent because the wall fluxes vanish. The mean is
    removed afterwards.
    """
    n2 = grid.n2
    inv_h2 = 1.0 / grid.h2 ** 2
    k = _x1_symbol(grid)
    modes = grid.to_modes(rhs)
    solution = np.zeros_like(modes)
    neighbours = np.full(n2, 2.0)
    neighbours[0] = neighbours[-1] = 1.0
    for m in range(grid.n1):
        quarter_k2 = 0.25 * k[m] ** 2
        banded = np.zeros((3, n2), dtype=complex)
        banded[0, 1:] = inv_h2 - quarter_k2
        banded[1, :] = -neighbours * (quarter_k2 + inv_h2)
        banded[2, :-1] = inv_h2 - quarter_k2
        b = modes[m].copy()
        if k[m] == 0.0:
            banded[1, 0] = 1.0
            banded[0, 1] = 0.0
            b[0] = 0.0
        solution[m] = solve_banded((1, 1), banded, b)
    phi = grid.to_grid(solution)
    return phi - np.mean(phi)


def helmholtz_solve(
    rhs: np.ndarray, grid: ChannelGrid, coefficient: float, scale: float
) -> np.ndarray:
    """
    Solve (I - scale * coefficient * L) v = rhs for interior node values per x1 mode.

    L is -k^2 plus the three-point x2 Laplacian with homogeneous Dirichlet
    rows; rhs and the returned array hold node values including walls,
    whose entries are zero on return.
    """
    n_inner = grid.n2 - 1
    inv_h2 = 1.0 / grid.h2 ** 2
    k = _x1_symbol(grid)
    a = scale * coefficient
    modes = grid.to_modes(rhs)
    solution = np.zeros_like(modes)
    for m in range(grid.n1):
        banded = np.zeros((3, n_inner), dtype=complex)
        banded[0, 1:] = -a * inv_h2
        banded[1, :] = 1.0 + a * (k[m] ** 2 + 2.0 * inv_h2)
        banded[2, :-1] = -a * inv_h2
        solution[m, 1:-1] = solve_banded((1, 1), banded, modes[m, 1:-1])
    return grid.to_grid(solution)


def compact_laplacian(values: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """-k^2 v + three-point d22 v on interior nodes; zero on the walls."""
    out = np.zeros_like(values)
    second = values[..., 2:] - 2.0 * values[..., 1:-1] + values[..., :-2]
    out[..., 1:-1] = d11(values, grid)[..., 1:-1] + second / grid.h2 ** 2
    return out


def l2_nodes(values: np.ndarray, grid: ChannelGrid) -> float:
    """L2 norm over the nodes; leading axes are summed as components."""
    density = values ** 2
    if density.ndim > 2:
        density = density.reshape((-1,) + grid.node_shape).sum(axis=0)
    return float(np.sqrt(grid.integrate_nodes(density)))


def l2_cells(
    values: np.ndarray, grid: ChannelGrid, mask: Optional[np.ndarray] = None
) -> float:
    density = values ** 2
    if mask is not None:
        density = density * mask
    return float(np.sqrt(grid.integrate_cells(density)))
