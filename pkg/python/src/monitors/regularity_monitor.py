#!/usr/bin/env python3
"""
Per-sample monitor evaluation for torus and channel runs.

A monitor turns one accepted solver state into one report row and
advances the report's running integrals.
"""

from __future__ import annotations
import logging
import math
from typing import Dict, Optional

import numpy as np

from fields import channel_calculus as cc
from fields.torus_calculus import gradient_norm, l2_norm, sobolev_norm
from models.channel_field import ChannelField
from models.regularity_report import RegularityReport
from models.stress_params import StressParams
from models.torus_field import TorusField
from monitors.accumulators import weighted_accumulator_update
from monitors.functionals import (
    du_lp_norm,
    functional_J,
    functional_M,
    functional_pair,
    stress_power,
)
from solvers.channel_diagnostics import (
    ChannelDerivatives,
    alpha1_field,
    alpha1_lower_bound,
    convective_estimate,
    d2_star,
    pressure_gradient_diagnostics,
    recover_d22u1,
)

logger = logging.getLogger(__name__)

# (column, accumulator integrand column, weight mode)
RUNNING_INTEGRALS = (
    ('int_grad_sq', 'grad_sq', 'none'),
    ('int_t_h2_sq', 'h2_sq', 'linear_t'),
    ('int_du_lp_p', 'du_lp_p', 'none'),
    ('int_t_I1', 'functional_I1', 'linear_t'),
    ('int_l2_p', 'l2_p', 'none'),
    ('int_h2_sq', 'h2_sq', 'none'),
)


class _BaseMonitor:
    """Shared accumulation of running integrals and the energy residual."""

    def __init__(
        self, params: StressParams, dr_exponent: Optional[float] = None
    ) -> None:
        self.params = params
        self.dr_exponent = dr_exponent if dr_exponent is not None else params.p
        self._l2_start: Optional[float] = None

    def _finish_row(
        self,
        report: RegularityReport,
        t: float,
        row: Dict[str, float],
        integrands: Dict[str, float],
    ) -> Dict[str, float]:
        for column, source, mode in RUNNING_INTEGRALS:
            weighted_accumulator_update(report, column, t, integrands[source], mode)
            row[column] = report.accumulated(column)

        dissipation = (
            self.params.nu0 * integrands['grad_sq']
            + self.params.nu1 * row['stress_power']
        )
        weighted_accumulator_update(report, 'energy_dissipation', t, dissipation)
        weighted_accumulator_update(report, 'energy_work', t, row['forcing_power'])
        if self._l2_start is None:
            self._l2_start = row['l2_norm']
        row['energy_residual'] = abs(
            0.5 * row['l2_norm'] ** 2
            + report.accumulated('energy_dissipation')
            - 0.5 * self._l2_start ** 2
            - report.accumulated('energy_work')
        )
        row['t'] = t
        report.append(row)
        return row


class TorusMonitor(_BaseMonitor):
    """Monitor samples of torus solutions."""

    def sample(
        self,
        report: RegularityReport,
        u: TorusField,
        t: float,
        forcing_hat: Optional[np.ndarray] = None,
        u_t: Optional[TorusField] = None,
    ) -> Dict[str, float]:
        """
        Evaluate every monitor on u at time t and append the row.

        Args:
            report: Report receiving the row
            u: Accepted velocity
            t: Its time
            forcing_hat: Spectral body force at t, if any
            u_t: Time derivative estimate; J and ||u_t|| are NaN without it
        """
        params = self.params
        l2 = l2_norm(u)
        grad = gradient_norm(u)
        h2 = sobolev_norm(u, order=2, exponent=2.0)
        du_p = du_lp_norm(u, params.p)
        I, I1 = functional_pair(u, params)
        forcing_power = 0.0
        if forcing_hat is not None:
            overlap = float(np.sum(np.real(np.conj(forcing_hat) * u.spectral)))
            forcing_power = overlap * (2.0 * math.pi) ** 2 / u.n ** 4
        functional_j = math.nan
        ut_norm = math.nan
        if u_t is not None:
            functional_j = functional_J(u, u_t, params)
            ut_norm = l2_norm(u_t)
        row = {
            'l2_norm': l2,
            'grad_l2_norm': grad,
            'h2_norm': h2,
            'du_lp_norm': du_p,
            'functional_I': I,
            'functional_I1': I1,
            'functional_J': functional_j,
            'functional_M': functional_M(u, params),
            'ut_l2_norm': ut_norm,
            'stress_power': stress_power(u, params),
            'forcing_power': forcing_power,
        }
        integrands = {
            'grad_sq': grad ** 2,
            'h2_sq': h2 ** 2,
            'du_lp_p': du_p ** params.p,
            'functional_I1': I1,
            'l2_p': l2 ** self.dr_exponent,
        }
        return self._finish_row(report, t, row, integrands)


class ChannelMonitor(_BaseMonitor):
    """
    Monitor samples of channel solutions, including the wall-normal diagnostics.

    Diagnostics that need du/dt are NaN on the first sample.
    """

    def __init__(
        self, params: StressParams, dr_exponent: Optional[float] = None
    ) -> None:
        super().__init__(params, dr_exponent)
        self.alpha_bound_violations = 0

    def sample(
        self,
        report: RegularityReport,
        field: ChannelField,
        t: float,
        forcing: np.ndarray,
        u_t: Optional[np.ndarray] = None,
    ) -> Dict[str, float]:
        params = self.params
        grid = field.grid
        der = ChannelDerivatives.of(field)
        l2 = cc.l2_nodes(der.u, grid)
        grad_sq = grid.integrate_nodes(np.sum(der.d1u ** 2 + der.d2u ** 2, axis=0))
        star = d2_star(der)
        d22u1 = der.d22u[0]
        hessian_sq = grid.integrate_nodes(star.full_hessian_squared(d22u1))
        h2 = math.sqrt(l2 ** 2 + grad_sq + hessian_sq)
        du_p = du_lp_norm(field, params.p)
        I, I1 = functional_pair(field, params)
        forcing_power = grid.integrate_nodes(np.sum(forcing * der.u, axis=0))

        alpha, alpha_min = alpha1_field(field, params, der)
        lower = alpha1_lower_bound(field, params, der)
        below_bound = bool(np.any(alpha < lower * (1.0 - 1e-12)))
        if below_bound or alpha_min < params.nu0 * (1.0 - 1e-12):
            self.alpha_bound_violations += 1
            logger.warning(
                "alpha1 lower bound violated at t=%.6g (min %.6e)", t, alpha_min
            )
        conv = convective_estimate(der)

        row = {
            'l2_norm': l2,
            'grad_l2_norm': math.sqrt(grad_sq),
            'h2_norm': h2,
            'du_lp_norm': du_p,
            'functional_I': I,
            'functional_I1': I1,
            'functional_M': functional_M(field, params),
            'stress_power': stress_power(field, params),
            'forcing_power': forcing_power,
            'alpha1_min': alpha_min,
            'd2plus_l2': math.sqrt(grid.integrate_nodes(star.squared_magnitude())),
            'd22u1_l2': math.sqrt(grid.integrate_nodes(d22u1 ** 2)),
            'conv_l2': conv.conv_l2,
            'conv_holder_bound': conv.holder_bound,
        }
        if u_t is not None:
            u_t_field = ChannelField(grid, u_t)
            recovery = recover_d22u1(field, field.pressure, u_t, forcing, params, der)
            pressure = pressure_gradient_diagnostics(
                field, field.pressure, u_t, forcing, params, der
            )
            row.update({
                'functional_J': functional_J(field, u_t_field, params),
                'ut_l2_norm': cc.l2_nodes(u_t, grid),
                'recovery_residual': recovery.residual,
                'dp1_l2': pressure.dp1_l2,
                'dp2_l2': pressure.dp2_l2,
                'necas_ratio': pressure.necas_ratio,
                'tangential_bound_ok': 1.0 if pressure.tangential_bound_ok else 0.0,
            })
        integrands = {
            'grad_sq': grad_sq,
            'h2_sq': h2 ** 2,
            'du_lp_p': du_p ** params.p,
            'functional_I1': I1,
            'l2_p': l2 ** self.dr_exponent,
        }
        return self._finish_row(report, t, row, integrands)
