#!/usr/bin/env python3
"""
IMEX projection solver on the periodic channel ]-1,1[^2 with no-slip walls.

Velocities live on the nodes x2_j = -1 + j h2 (walls at j = 0, N2), the
pressure at cell centers. Each step solves one tridiagonal Helmholtz system
per x1 mode and component for the implicit viscosity, then an incremental
pressure projection (one tridiagonal Poisson system per x1 mode) restores
the discrete divergence constraint.
"""

from __future__ import annotations
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from constitutive.stress_tensor import stress_components
from fields import channel_calculus as cc
from models.channel_field import ChannelField, ChannelGrid
from models.errors import DomainError, RejectedStepError, ShearflowError
from models.regularity_report import RegularityReport
from models.run_config import CHANNEL_SCHEMES, InitialSpec, SolverConfig
from models.stress_params import StressParams
from monitors.regularity_monitor import ChannelMonitor
from solvers.forcing import Forcing
from solvers.initial_data import channel_initial
from solvers.torus_solver import stabilization_coefficient

logger = logging.getLogger(__name__)


SnapshotSink = Callable[[int, float, ChannelField], None]
FailureSink = Callable[[RegularityReport], None]


@dataclass(frozen=True)
class ChannelSolverState:
    """
    Attributes:
        t: Time
        field: Velocity and cell pressure, walls at zero
        params: Constitutive constants
        forcing: Body force source
        step_index: Number of steps taken
        previous_explicit: Explicit terms of the previous step (AB2 history)
        previous_dt: Step size that produced previous_explicit
    """
    t: float
    field: ChannelField
    params: StressParams
    forcing: Forcing
    step_index: int = 0
    previous_explicit: Optional[np.ndarray] = None
    previous_dt: Optional[float] = None


@dataclass
class ChannelRun:
    report: RegularityReport
    snapshots: List[Tuple[float, ChannelField]] = field(default_factory=list)
    projection_defect: float = 0.0


def project(velocity: np.ndarray, grid: ChannelGrid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Remove the discrete gradient part of a node velocity.

    Returns:
        (projected velocity with zero walls, cell potential phi with
        velocity = projected + G phi)
    """
    phi = cc.solve_pressure_poisson(cc.staggered_divergence(velocity, grid), grid)
    projected = velocity - cc.pressure_gradient(phi, grid)
    projected[..., 0] = 0.0
    projected[..., -1] = 0.0
    return projected, phi


def stress_divergence_nodes(
    velocity: np.ndarray, grid: ChannelGrid, params: StressParams
) -> np.ndarray:
    """
    div S(Du) at the interior nodes from the cell-centered stress.

    Du is formed with compact x2 differences across each cell; the x1
    derivative of the averaged stress is dealiased. Wall rows are zero.
    """
    D = cc.sym_grad_cells(velocity, grid)
    s11, s12, s22 = stress_components(D.d11, D.d12, D.d22, params)
    out = np.zeros((2,) + grid.node_shape)
    for i, (first, second) in enumerate(((s11, s12), (s12, s22))):
        out[i, :, 1:-1] = (
            cc.d1(cc.interior_average(first), grid, dealias=True)
            + cc.cell_difference(second, grid)
        )
    return out


def convection_nodes(velocity: np.ndarray, grid: ChannelGrid) -> np.ndarray:
    """(u . grad) u on the nodes with dealiased x1 derivatives."""
    u = cc.dealias(velocity, grid)
    return u[0] * cc.d1(u, grid, dealias=True) + u[1] * cc.d2(u, grid)


class ChannelSolver:
    """
    Time stepper for the shear-thinning equations in the channel.

    nu0 Lap u plus the stabilization kappa Lap u are Crank-Nicolson
    (backward Euler for imex-euler); nu1 div S(Du) - kappa Lap u, the
    convection and the force are explicit, Adams-Bashforth 2 after an
    Euler start.

    Raises:
        DomainError: p < 3/2, nu0 <= 0 or an unsupported scheme
    """

    def __init__(
        self,
        grid: ChannelGrid,
        params: StressParams,
        config: SolverConfig,
        forcing: Forcing,
    ) -> None:
        params.require_channel_range()
        params.require_viscous()
        if config.scheme not in CHANNEL_SCHEMES:
            raise DomainError(
                f"channel scheme must be one of {CHANNEL_SCHEMES}, "
                f"got {config.scheme!r}"
            )
        self.grid = grid
        self.params = params
        self.config = config
        self.forcing = forcing
        self.kappa = stabilization_coefficient(params, config.stabilization)
        self.viscosity = params.nu0 + self.kappa
        self.spacing = min(grid.h1, grid.h2)

    def init(self, spec: InitialSpec) -> Tuple[ChannelSolverState, float]:
        """Initial state, projected onto discretely divergence-free fields."""
        raw = channel_initial(spec, self.grid)
        velocity = np.asarray(raw.velocity)
        projected, _ = project(np.array(velocity), self.grid)
        defect = cc.l2_nodes(velocity - projected, self.grid)
        if defect > 1e-12 * max(1.0, cc.l2_nodes(velocity, self.grid)):
            logger.warning(
                "Channel initial data %r: projection removed a part of L2 norm %.3e",
                spec.kind,
                defect,
            )
        field = ChannelField(self.grid, projected, raw.pressure)
        state = ChannelSolverState(
            t=0.0, field=field, params=self.params, forcing=self.forcing
        )
        return state, defect

    def explicit_terms(self, velocity: np.ndarray, t: float) -> np.ndarray:
        """nu1 div S(Du) - kappa Lap u - (u . grad) u + f on the nodes, zero walls."""
        total = -convection_nodes(velocity, self.grid)
        if self.params.nu1 > 0.0:
            stress = stress_divergence_nodes(velocity, self.grid, self.params)
            total += self.params.nu1 * stress
            total -= self.kappa * cc.compact_laplacian(velocity, self.grid)
        if not self.forcing.is_zero:
            total += self.forcing.at(t)
        total[..., 0] = 0.0
        total[..., -1] = 0.0
        return total

    def _check_cfl(self, state: ChannelSolverState, dt: float) -> None:
        courant = state.field.max_speed() * dt / self.spacing
        if courant > self.config.cfl_limit:
            raise RejectedStepError(
                f"CFL number {courant:.3f} exceeds limit {self.config.cfl_limit} "
                f"at t={state.t:.6g}",
                time=state.t,
            )

    def step(self, state: ChannelSolverState, dt: float) -> ChannelSolverState:
        """
        Advance one step of size dt.

        Raises:
            RejectedStepError: CFL heuristic violated or non-finite result
        """
        if dt <= 0:
            raise DomainError(f"dt must be positive, got {dt}")
        started = time.perf_counter()
        self._check_cfl(state, dt)
        grid = self.grid
        u = np.array(state.field.velocity)
        pressure = np.asarray(state.field.pressure)
        current = self.explicit_terms(u, state.t)
        previous = state.previous_explicit if state.previous_dt == dt else None

        if self.config.scheme == 'imex-euler':
            rhs = u + dt * current
            scale = dt
        else:
            if previous is None:
                explicit = current
            else:
                explicit = 1.5 * current - 0.5 * previous
            diffusion = 0.5 * dt * self.viscosity * cc.compact_laplacian(u, grid)
            rhs = u + diffusion + dt * explicit
            scale = 0.5 * dt
        rhs -= dt * cc.pressure_gradient(pressure, grid)
        predicted = np.stack([
            cc.helmholtz_solve(rhs[i], grid, self.viscosity, scale) for i in range(2)
        ])

        projected, phi = project(predicted / dt, grid)
        velocity = projected * dt
        pressure_new = pressure + phi
        t_new = state.t + dt
        finite = np.all(np.isfinite(velocity)) and np.all(np.isfinite(pressure_new))
        if not finite:
            raise RejectedStepError(
                f"non-finite channel state after step to t={t_new:.6g}", time=t_new
            )
        field_new = ChannelField(grid, velocity, pressure_new, t_new)
        logger.debug(
            "channel step %d t=%.6g |u|max=%.4g (%.2f ms)",
            state.step_index + 1,
            t_new,
            field_new.max_speed(),
            1e3 * (time.perf_counter() - started),
        )
        return replace(
            state,
            t=t_new,
            field=field_new,
            step_index=state.step_index + 1,
            previous_explicit=current,
            previous_dt=dt,
        )

    def run(
        self,
        spec: InitialSpec,
        dr_exponent: Optional[float] = None,
        on_snapshot: Optional[SnapshotSink] = None,
        on_failure: Optional[FailureSink] = None,
    ) -> ChannelRun:
        """
        Step from t = 0 to T with the same sampling contract as the torus run.

        Diagnostics that need du/dt use the backward difference of the last
        step and are absent on the t = 0 row.
        """
        config = self.config
        state, defect = self.init(spec)
        report = RegularityReport('channel')
        report.metadata.update({
            'resolution': self.grid.n2,
            'n1': self.grid.n1,
            'projection_defect': defect,
            'kappa': self.kappa,
        })
        monitor = ChannelMonitor(self.params, dr_exponent)
        outcome = ChannelRun(
            report=report, snapshots=[(0.0, state.field)], projection_defect=defect
        )
        monitor.sample(report, state.field, 0.0, self.forcing.at(0.0))
        if on_snapshot is not None:
            on_snapshot(0, 0.0, state.field)

        steps = config.steps
        logger.info(
            "Channel run: %dx%d scheme=%s dt=%g steps=%d",
            self.grid.n1, self.grid.n2, config.scheme, config.dt, steps,
        )
        try:
            for i in range(1, steps + 1):
                previous = state
                state = self.step(state, config.dt)
                t = i * config.dt
                state = replace(state, t=t, field=state.field.with_time(t))
                last = i == steps
                if i % config.monitor_stride == 0 or last:
                    change = np.asarray(state.field.velocity) - np.asarray(
                        previous.field.velocity
                    )
                    u_t = change / config.dt
                    forcing = self.forcing.at(state.t)
                    monitor.sample(report, state.field, state.t, forcing, u_t)
                if i % config.snapshot_stride == 0 or last:
                    outcome.snapshots.append((state.t, state.field))
                    if on_snapshot is not None:
                        on_snapshot(i, state.t, state.field)
        except ShearflowError:
            logger.error(
                "Channel run failed after %d samples; flushing partial report",
                len(report),
            )
            if on_failure is not None:
                on_failure(report)
            raise
        report.metadata['alpha_bound_violations'] = monitor.alpha_bound_violations
        return outcome
