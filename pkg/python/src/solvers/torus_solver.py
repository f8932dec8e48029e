#!/usr/bin/env python3
"""
Fourier-Galerkin time integration on the torus.

The Galerkin space is the set of Fourier modes with max(|k1|, |k2|) <= m.
nu0 Lap u, plus a linear stabilization kappa Lap u, is treated implicitly
(exact integrating factor or Crank-Nicolson); the stress divergence minus
kappa Lap u, the convection and the body force are explicit, with
Adams-Bashforth 2 after an Euler start. The fully explicit SSP-RK3 scheme
covers nu0 = 0.
"""

from __future__ import annotations
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from fields.torus_calculus import (
    convection,
    leray_project,
    max_speed,
    stress_divergence,
)
from models.errors import DomainError, RejectedStepError, ShearflowError
from models.regularity_report import RegularityReport
from models.run_config import InitialSpec, SolverConfig
from models.stress_params import StressParams
from models.torus_field import TorusField, TorusGrid, max_alias_free_cutoff
from monitors.regularity_monitor import TorusMonitor
from solvers.forcing import Forcing
from solvers.initial_data import torus_initial

logger = logging.getLogger(__name__)

STABILIZATION_CAP = 10.0

SnapshotSink = Callable[[int, float, TorusField], None]
FailureSink = Callable[[RegularityReport], None]


def stabilization_coefficient(params: StressParams, weight: float) -> float:
    """
    kappa = weight * (nu1/2) * min(delta^(p-2), cap).

    delta = 0 uses weight * nu1/2.
    """
    if params.delta == 0.0:
        return weight * 0.5 * params.nu1
    scale = min(params.delta ** (params.p - 2.0), STABILIZATION_CAP)
    return weight * 0.5 * params.nu1 * scale


@dataclass(frozen=True)
class TorusSolverState:
    """
    One accepted step.

    Attributes:
        t: Time
        u: Solenoidal, mean-zero, truncated velocity
        params: Constitutive constants
        cutoff: Galerkin cutoff m
        forcing: Body force source
        step_index: Number of steps taken
        previous_explicit: Explicit terms of the previous step (AB2 history)
        previous_dt: Step size that produced previous_explicit
    """
    t: float
    u: TorusField
    params: StressParams
    cutoff: int
    forcing: Forcing
    step_index: int = 0
    previous_explicit: Optional[np.ndarray] = None
    previous_dt: Optional[float] = None


@dataclass
class TorusRun:
    """Outcome of a torus run: report, snapshots and the initial projection defect."""
    report: RegularityReport
    snapshots: List[Tuple[float, TorusField]] = field(default_factory=list)
    projection_defect: float = 0.0


class TorusSolver:
    """
    IMEX spectral solver for the shear-thinning equations on the torus.

    Args:
        grid: Collocation grid
        params: Constitutive constants
        config: Time stepping controls
        forcing: Body force
        cutoff: Galerkin cutoff m; the alias-free cutoff when None

    Raises:
        DomainError: nu0 = 0 without the fully explicit scheme, or a cutoff
            beyond the alias-free limit
    """

    def __init__(
        self,
        grid: TorusGrid,
        params: StressParams,
        config: SolverConfig,
        forcing: Forcing,
        cutoff: Optional[int] = None,
    ) -> None:
        limit = max_alias_free_cutoff(grid.n)
        self.cutoff = limit if cutoff is None else int(cutoff)
        if not 1 <= self.cutoff <= limit:
            raise DomainError(
                f"cutoff must lie in [1, {limit}] for N={grid.n}, got {self.cutoff}"
            )
        self.explicit_only = config.scheme == 'rk3-fully-explicit'
        if params.nu0 <= 0.0 and not self.explicit_only:
            raise DomainError("nu0 = 0 requires scheme = 'rk3-fully-explicit'")
        self.grid = grid
        self.params = params
        self.config = config
        self.forcing = forcing
        self.mask = grid.truncation_mask(self.cutoff)
        if self.explicit_only:
            self.kappa = 0.0
        else:
            self.kappa = stabilization_coefficient(params, config.stabilization)
        self.linear = (params.nu0 + self.kappa) * grid.k_squared()

    def init(self, spec: InitialSpec) -> Tuple[TorusSolverState, float]:
        """
        Initial state from an initial-data description.

        Returns:
            (state, projection defect of the supplied data)
        """
        data = torus_initial(spec, self.grid, self.cutoff, self.config.seed)
        state = TorusSolverState(t=0.0, u=data.field, params=self.params,
                                 cutoff=self.cutoff, forcing=self.forcing)
        return state, data.projection_defect

    def _projected(self, coefficients: np.ndarray) -> np.ndarray:
        return leray_project(coefficients * self.mask, self.grid).spectral

    def explicit_terms(self, u: TorusField, t: float) -> np.ndarray:
        """P[nu1 div S(Du) - kappa Lap u - (u.grad)u + f], truncated."""
        total = -convection(u, self.cutoff)
        if self.params.nu1 > 0.0:
            stress = stress_divergence(u, self.params, self.cutoff)
            total = total + self.params.nu1 * stress
            total = total + self.kappa * self.grid.k_squared() * u.spectral
        if not self.forcing.is_zero:
            total = total + self.forcing.at(t)
        return self._projected(total)

    def _full_rhs(self, u: TorusField, t: float) -> np.ndarray:
        return -self.linear * u.spectral + self.explicit_terms(u, t)

    def _check_cfl(self, u: TorusField, t: float, dt: float) -> None:
        courant = max_speed(u) * dt / self.grid.spacing
        if courant > self.config.cfl_limit:
            raise RejectedStepError(
                f"CFL number {courant:.3f} exceeds limit {self.config.cfl_limit} "
                f"at t={t:.6g}",
                time=t,
            )

    def step(self, state: TorusSolverState, dt: float) -> TorusSolverState:
        """
        Advance one step of size dt.

        Raises:
            RejectedStepError: CFL heuristic violated or non-finite result
        """
        if dt <= 0:
            raise DomainError(f"dt must be positive, got {dt}")
        started = time.perf_counter()
        u = state.u
        self._check_cfl(u, state.t, dt)
        hat = u.spectral
        previous = state.previous_explicit if state.previous_dt == dt else None
        current: Optional[np.ndarray] = None

        if self.explicit_only:
            stage1 = hat + dt * self._full_rhs(u, state.t)
            u1 = TorusField(self.grid, stage1 * self.mask)
            stage2 = u1.spectral + dt * self._full_rhs(u1, state.t + dt)
            u2 = TorusField(self.grid, (0.75 * hat + 0.25 * stage2) * self.mask)
            stage3 = u2.spectral + dt * self._full_rhs(u2, state.t + 0.5 * dt)
            new = hat / 3.0 + 2.0 / 3.0 * stage3
        else:
            current = self.explicit_terms(u, state.t)
            if self.config.diffusion == 'integrating-factor':
                decay = np.exp(-self.linear * dt)
                if self.config.scheme == 'imex-euler' or previous is None:
                    new = decay * (hat + dt * current)
                else:
                    extrapolated = 3.0 * decay * current - decay ** 2 * previous
                    new = decay * hat + 0.5 * dt * extrapolated
            elif self.config.scheme == 'imex-euler':
                new = (hat + dt * current) / (1.0 + dt * self.linear)
            else:
                half = 0.5 * dt * self.linear
                if previous is None:
                    explicit = current
                else:
                    explicit = 1.5 * current - 0.5 * previous
                new = ((1.0 - half) * hat + dt * explicit) / (1.0 + half)

        new = new * self.mask
        t_new = state.t + dt
        if not np.all(np.isfinite(new)):
            raise RejectedStepError(
                f"non-finite velocity after step to t={t_new:.6g}", time=t_new
            )
        u_new = TorusField(self.grid, new, solenoidal=True)
        logger.debug(
            "torus step %d t=%.6g |u|max=%.4g (%.2f ms)",
            state.step_index + 1,
            t_new,
            max_speed(u_new),
            1e3 * (time.perf_counter() - started),
        )
        return replace(
            state,
            t=t_new,
            u=u_new,
            step_index=state.step_index + 1,
            previous_explicit=current,
            previous_dt=dt if current is not None else None,
        )

    def run(
        self,
        spec: InitialSpec,
        dr_exponent: Optional[float] = None,
        on_snapshot: Optional[SnapshotSink] = None,
        on_failure: Optional[FailureSink] = None,
    ) -> TorusRun:
        """
        Step from t = 0 to T, sampling monitors and collecting snapshots.

        Monitors are sampled at t = 0, every monitor_stride steps and at T;
        snapshots likewise with snapshot_stride. On a solver error the
        partial report is handed to on_failure before the error propagates.
        """
        config = self.config
        state, defect = self.init(spec)
        report = RegularityReport('torus')
        report.metadata.update({
            'resolution': self.grid.n,
            'cutoff': self.cutoff,
            'projection_defect': defect,
            'kappa': self.kappa,
        })
        monitor = TorusMonitor(self.params, dr_exponent)
        outcome = TorusRun(
            report=report, snapshots=[(0.0, state.u)], projection_defect=defect
        )
        monitor.sample(report, state.u, 0.0, self._forcing_hat(0.0))
        if on_snapshot is not None:
            on_snapshot(0, 0.0, state.u)

        steps = config.steps
        logger.info(
            "Torus run: N=%d m=%d scheme=%s dt=%g steps=%d",
            self.grid.n, self.cutoff, config.scheme, config.dt, steps,
        )
        try:
            for i in range(1, steps + 1):
                previous = state
                state = self.step(state, config.dt)
                state = replace(state, t=i * config.dt)
                last = i == steps
                if i % config.monitor_stride == 0 or last:
                    u_t = (state.u - previous.u).scaled(1.0 / config.dt)
                    forcing = self._forcing_hat(state.t)
                    monitor.sample(report, state.u, state.t, forcing, u_t)
                if i % config.snapshot_stride == 0 or last:
                    outcome.snapshots.append((state.t, state.u))
                    if on_snapshot is not None:
                        on_snapshot(i, state.t, state.u)
        except ShearflowError:
            logger.error(
                "Torus run failed after %d samples; flushing partial report",
                len(report),
            )
            if on_failure is not None:
                on_failure(report)
            raise
        return outcome

    def _forcing_hat(self, t: float) -> Optional[np.ndarray]:
        return None if self.forcing.is_zero else self.forcing.at(t)
