#!/usr/bin/env python3
"""
Initial velocity fields for both geometries.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.fft

from fields.snapshot_io import read_snapshot
from fields.torus_calculus import l2_norm, leray_project
from models.channel_field import ChannelField, ChannelGrid
from models.errors import DomainError, InvalidInputError
from models.run_config import SPECTRUM_MASTER_MODES, SPECTRUM_MAX_CUTOFF, InitialSpec
from models.torus_field import TorusField, TorusGrid, max_alias_free_cutoff

logger = logging.getLogger(__name__)

# Rough data is drawn once on this lattice so every resolution of a
# refinement ladder truncates the same coefficients.
MASTER_MODES = SPECTRUM_MASTER_MODES
VORTEX_CONCENTRATION = 4.0


@dataclass(frozen=True)
class TorusInitialData:
    """Initial torus field and the norm of the gradient part removed from it."""
    field: TorusField
    projection_defect: float


def taylor_green(grid: TorusGrid, amplitude: float = 1.0) -> np.ndarray:
    x1, x2 = grid.coordinates()
    return amplitude * np.stack([np.sin(x1) * np.cos(x2), -np.cos(x1) * np.sin(x2)])


def shear(grid: TorusGrid, amplitude: float = 1.0, wavenumber: int = 1) -> np.ndarray:
    x1, x2 = grid.coordinates()
    return amplitude * np.stack([np.sin(wavenumber * x2), np.zeros_like(x1)])


def vortex(grid: TorusGrid, amplitude: float = 1.0) -> np.ndarray:
    """Periodic bump vortex, stream function exp(c (cos(x1-pi) + cos(x2-pi) - 2))."""
    x1, x2 = grid.coordinates()
    c = VORTEX_CONCENTRATION
    psi = amplitude * np.exp(c * (np.cos(x1 - math.pi) + np.cos(x2 - math.pi) - 2.0))
    return np.stack([-c * psi * np.sin(x2 - math.pi), c * psi * np.sin(x1 - math.pi)])


@lru_cache(maxsize=8)
def _master_coefficients(alpha: float, seed: int) -> np.ndarray:
    """
    Fourier-series coefficients a(k) of a rough solenoidal field with unit L2 norm.

    Per-mode magnitude is |k|^(-alpha - 1/2), so shell energy decays like
    |k|^(-2 alpha); phases are uniform and antisymmetric in k for reality.
    """
    k = scipy.fft.fftfreq(MASTER_MODES, d=1.0 / MASTER_MODES)
    k1, k2 = np.meshgrid(k, k, indexing='ij')
    k_abs = np.hypot(k1, k2)
    safe = np.where(k_abs > 0, k_abs, 1.0)
    magnitude = np.where(k_abs > 0, safe ** (-alpha - 0.5), 0.0)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=(2, MASTER_MODES, MASTER_MODES))
    mirrored = np.roll(theta[:, ::-1, ::-1], shift=1, axis=(1, 2))
    coefficients = magnitude * np.exp(1j * (theta - mirrored))
    half = MASTER_MODES // 2
    coefficients[:, half, :] = 0.0
    coefficients[:, :, half] = 0.0
    # project on the master lattice
    k_sq = np.where(k_abs > 0, k_abs ** 2, 1.0)
    k_dot = (k1 * coefficients[0] + k2 * coefficients[1]) / k_sq
    coefficients = np.stack(
        [coefficients[0] - k1 * k_dot, coefficients[1] - k2 * k_dot]
    )
    norm = 2.0 * math.pi * math.sqrt(float(np.sum(np.abs(coefficients) ** 2)))
    coefficients /= norm
    coefficients.setflags(write=False)
    return coefficients


def spectrum_field(
    grid: TorusGrid,
    alpha: float,
    amplitude: float,
    seed: int,
    cutoff: Optional[int] = None,
) -> TorusField:
    """
    Rough data with a power-law spectrum, truncated to the grid's cutoff.

    Args:
        grid: Target grid
        alpha: Shell-spectrum exponent; L2 data needs alpha > 1/2
        amplitude: L2 norm of the untruncated field
        seed: Phase seed
        cutoff: Galerkin cutoff (default alias-free)

    Raises:
        DomainError: The cutoff reaches past the master lattice
    """
    m = max_alias_free_cutoff(grid.n) if cutoff is None else cutoff
    if m > SPECTRUM_MAX_CUTOFF:
        raise DomainError(
            f"spectrum data is drawn for |k_i| <= {SPECTRUM_MAX_CUTOFF}; "
            f"cutoff {m} on n = {grid.n} is too large (set grid.cutoff)"
        )
    master = _master_coefficients(float(alpha), int(seed))
    k = scipy.fft.fftfreq(grid.n, d=1.0 / grid.n).astype(int)
    kept = np.abs(k) <= m
    rows = np.mod(k[kept], MASTER_MODES)
    index = np.flatnonzero(kept)
    hat = np.zeros((2, grid.n, grid.n), dtype=complex)
    hat[:, index[:, None], index[None, :]] = (
        grid.n**2 * amplitude * master[:, rows[:, None], rows[None, :]]
    )
    return TorusField(grid, hat, solenoidal=True)


def resample_torus(field: TorusField, grid: TorusGrid) -> TorusField:
    """Zero-pad or truncate the Fourier coefficients onto another resolution."""
    if field.grid == grid:
        return field
    m = min(field.n, grid.n) // 2 - 1
    source_k = scipy.fft.fftfreq(field.n, d=1.0 / field.n).astype(int)
    target_k = scipy.fft.fftfreq(grid.n, d=1.0 / grid.n).astype(int)
    keep = np.abs(target_k) <= m
    src_index = np.mod(target_k[keep], field.n)
    hat = np.zeros((2, grid.n, grid.n), dtype=complex)
    block = field.spectral[:, src_index[:, None], src_index[None, :]]
    target = np.flatnonzero(keep)
    hat[:, target[:, None], target[None, :]] = block * (grid.n / field.n) ** 2
    return TorusField(grid, hat, solenoidal=field.solenoidal)


def torus_initial(
    spec: InitialSpec, grid: TorusGrid, cutoff: Optional[int] = None, seed: int = 0
) -> TorusInitialData:
    """
    Build, project and truncate the initial torus field.

    A field that is not divergence-free is projected and the size of the
    removed gradient part is logged as a warning.

    Raises:
        InvalidInputError: Unknown kind or unreadable snapshot geometry
        DomainError: Spectrum data with a cutoff past the master lattice
    """
    kind = spec.kind
    if kind == 'zero':
        return TorusInitialData(TorusField.zeros(grid), 0.0)
    if kind == 'spectrum':
        rough = spectrum_field(grid, spec.alpha, spec.amplitude, seed, cutoff)
        return TorusInitialData(rough, 0.0)
    if kind == 'taylor-green':
        raw = TorusField.from_physical(grid, taylor_green(grid, spec.amplitude))
    elif kind == 'shear':
        raw = TorusField.from_physical(grid, shear(grid, spec.amplitude))
    elif kind == 'vortex':
        raw = TorusField.from_physical(grid, vortex(grid, spec.amplitude))
    elif kind == 'snapshot':
        if spec.path is None:
            raise InvalidInputError("snapshot initial data needs a path")
        loaded, _ = read_snapshot(spec.path)
        if not isinstance(loaded, TorusField):
            raise InvalidInputError(f"{spec.path} is not a torus snapshot")
        raw = resample_torus(loaded, grid)
    else:
        raise InvalidInputError(f"unknown torus initial data kind {kind!r}")

    raw = raw.truncated(cutoff)
    projected = leray_project(raw)
    defect = l2_norm(raw - projected)
    if defect > 1e-12 * max(1.0, l2_norm(raw)):
        logger.warning(
            "Initial data %r was not divergence-free; "
            "projection removed a part of L2 norm %.3e",
            kind,
            defect,
        )
    return TorusInitialData(projected, defect)


def channel_initial(spec: InitialSpec, grid: ChannelGrid) -> ChannelField:
    """
    Build the initial channel field.

    Raises:
        InvalidInputError: Unknown kind or mismatched snapshot grid
    """
    x1, x2 = grid.node_coordinates()
    zeros = np.zeros(grid.node_shape)
    if spec.kind == 'zero':
        return ChannelField.zeros(grid)
    if spec.kind == 'poiseuille':
        return ChannelField(grid, np.stack([spec.amplitude * (1.0 - x2 ** 2), zeros]))
    if spec.kind == 'shear-mode':
        mode = spec.amplitude * np.sin(math.pi * x2)
        return ChannelField(grid, np.stack([mode, zeros]))
    if spec.kind == 'cellular':
        # stream function psi = amp (1 - x2^2)^2 sin(pi x1); u = (d2 psi, -d1 psi)
        wall = 1.0 - x2 ** 2
        u1 = -4.0 * spec.amplitude * x2 * wall * np.sin(math.pi * x1)
        u2 = -math.pi * spec.amplitude * wall ** 2 * np.cos(math.pi * x1)
        return ChannelField(grid, np.stack([u1, u2]))
    if spec.kind == 'snapshot':
        if spec.path is None:
            raise InvalidInputError("snapshot initial data needs a path")
        loaded, _ = read_snapshot(spec.path)
        if not isinstance(loaded, ChannelField) or loaded.grid != grid:
            raise InvalidInputError(
                f"{spec.path} is not a channel snapshot on a {grid.n1}x{grid.n2} grid"
            )
        return loaded.with_time(0.0)
    raise InvalidInputError(f"unknown channel initial data kind {spec.kind!r}")
