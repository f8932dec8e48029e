#!/usr/bin/env python3
"""
Unit tests for the channel solver and its wall-normal diagnostics.
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Add the src directory to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from fields import channel_calculus as cc
from models.channel_field import ChannelField, ChannelGrid
from models.errors import DomainError
from models.run_config import ForcingSpec, InitialSpec, SolverConfig
from models.stress_params import StressParams
from solvers.channel_diagnostics import (
    alpha1_field,
    f1_bound_ratio,
    pressure_gradient_diagnostics,
    recover_d22u1,
)
from solvers.channel_solver import ChannelSolver, project
from solvers.forcing import channel_forcing

# p = 2 with delta > 0 keeps the stress weight at exactly one
NEWTONIAN = StressParams(p=2.0, delta=1.0, nu0=0.5, nu1=1.0)


def _solver(params=NEWTONIAN, grid=None, forcing=None, **config):
    grid = grid or ChannelGrid(8, 16)
    solver_config = SolverConfig(**{'dt': 1e-2, 'T': 0.2, **config})
    return ChannelSolver(
        grid, params, solver_config, channel_forcing(forcing or ForcingSpec(), grid)
    )


class TestChannelSolverSetup(unittest.TestCase):
    """Parameter and scheme checks."""

    def test_rejects_low_exponent(self):
        with self.assertRaises(DomainError):
            _solver(StressParams(p=1.4, delta=0.1, nu0=0.5, nu1=1.0))

    def test_rejects_zero_newtonian_viscosity(self):
        with self.assertRaises(DomainError):
            _solver(StressParams(p=1.5, delta=0.1, nu0=0.0, nu1=1.0))

    def test_rejects_explicit_scheme(self):
        with self.assertRaises(DomainError):
            _solver(scheme='rk3-fully-explicit')


class TestChannelSolver(unittest.TestCase):
    """Newtonian reductions with discrete closed forms."""

    def test_poiseuille_is_a_discrete_steady_state(self):
        # nu0 + nu1/2 = 1 and f = 2 give the profile 1 - x2^2
        forcing = ForcingSpec(kind='uniform', amplitude=2.0, components=[1.0, 0.0])
        solver = _solver(forcing=forcing)
        run = solver.run(InitialSpec(kind='poiseuille', amplitude=1.0))
        grid = solver.grid
        _, x2 = grid.node_coordinates()
        final = run.snapshots[-1][1]
        self.assertLessEqual(float(np.max(np.abs(final.u1 - (1.0 - x2 ** 2)))), 1e-12)
        self.assertLessEqual(float(np.max(np.abs(final.u2))), 1e-12)
        np.testing.assert_allclose(run.report.column('alpha1_min'), 1.0, rtol=1e-12)
        self.assertLessEqual(
            float(np.nanmax(run.report.column('recovery_residual'))), 1e-9
        )

    def test_recovered_normal_derivative_of_poiseuille(self):
        grid = ChannelGrid(8, 16)
        _, x2 = grid.node_coordinates()
        field = ChannelField(grid, np.stack([1.0 - x2 ** 2, np.zeros(grid.node_shape)]))
        forcing = np.stack([np.full(grid.node_shape, 2.0), np.zeros(grid.node_shape)])
        recovery = recover_d22u1(
            field,
            np.zeros(grid.cell_shape),
            np.zeros((2,) + grid.node_shape),
            forcing,
            NEWTONIAN,
        )
        np.testing.assert_allclose(recovery.recovered[:, 1:-1], -2.0, rtol=1e-12)
        self.assertLessEqual(recovery.residual, 1e-10)

    def test_shear_mode_decays_by_crank_nicolson_factor(self):
        solver = _solver(T=0.1)
        run = solver.run(InitialSpec(kind='shear-mode', amplitude=1.0))
        h = solver.grid.h2
        eigenvalue = 4.0 / h ** 2 * math.sin(math.pi * h / 2.0) ** 2
        half = 0.5 * solver.config.dt * NEWTONIAN.newtonian_viscosity * eigenvalue
        factor = ((1.0 - half) / (1.0 + half)) ** solver.config.steps
        initial = run.snapshots[0][1].u1
        final = run.snapshots[-1][1].u1
        np.testing.assert_allclose(final, factor * initial, rtol=0, atol=1e-12)

    def test_trivial_recovery(self):
        grid = ChannelGrid(8, 8)
        params = StressParams(p=1.5, delta=0.0, nu0=0.5, nu1=1.0)
        zeros = np.zeros((2,) + grid.node_shape)
        recovery = recover_d22u1(
            ChannelField.zeros(grid), np.zeros(grid.cell_shape), zeros, zeros, params
        )
        self.assertEqual(recovery.residual, 0.0)
        self.assertEqual(float(np.max(np.abs(recovery.recovered))), 0.0)


class TestShearThinningChannel(unittest.TestCase):
    """Constraint preservation and the alpha1 lower bound for p < 2."""

    def setUp(self):
        self.params = StressParams(p=1.5, delta=0.1, nu0=0.1, nu1=0.2)
        self.solver = _solver(self.params, dt=1e-3, T=0.01, snapshot_stride=5)
        self.run = self.solver.run(InitialSpec(kind='cellular', amplitude=0.5))

    def test_snapshots_are_divergence_free_with_no_slip(self):
        grid = self.solver.grid
        for _, field in self.run.snapshots:
            self.assertLessEqual(
                float(np.max(np.abs(cc.staggered_divergence(field.velocity, grid)))),
                1e-10,
            )
            self.assertEqual(float(np.max(np.abs(field.velocity[:, :, [0, -1]]))), 0.0)

    def test_alpha1_stays_above_nu0(self):
        alpha = self.run.report.column('alpha1_min')
        self.assertTrue(np.all(alpha >= self.params.nu0 * (1.0 - 1e-12)))
        self.assertEqual(self.run.report.metadata['alpha_bound_violations'], 0)
        tangential = self.run.report.column('tangential_bound_ok')
        self.assertTrue(math.isnan(tangential[0]))
        self.assertTrue(np.all(tangential[1:] == 1.0))

    def test_convective_estimate_below_holder_bound(self):
        conv = self.run.report.column('conv_l2')
        bound = self.run.report.column('conv_holder_bound')
        self.assertTrue(np.all(conv <= bound * (1.0 + 1e-9)))

    def test_f1_ratio_is_finite(self):
        field = self.run.snapshots[-1][1]
        self.assertTrue(math.isfinite(f1_bound_ratio(field, self.params)))

    def test_alpha1_needs_channel_range(self):
        field = self.run.snapshots[-1][1]
        with self.assertRaises(DomainError):
            alpha1_field(field, StressParams(p=1.2, delta=0.1, nu0=0.1, nu1=0.2))


class TestNecasRatioRefinement(unittest.TestCase):
    """The divergence-form pressure ratio settles as the grid is refined."""

    PARAMS = StressParams(p=1.5, delta=0.1, nu0=0.1, nu1=0.2)

    @classmethod
    def ratio(cls, n):
        grid = ChannelGrid(n, n)
        x1, x2 = grid.node_coordinates()
        wall = 1.0 - x2 ** 2
        velocity = 0.5 * np.stack([-4.0 * x2 * wall * np.sin(math.pi * x1),
                                   -math.pi * wall ** 2 * np.cos(math.pi * x1)])
        c1, c2 = np.meshgrid(grid.x1(), grid.x2_cells(), indexing='ij')
        pressure = np.cos(math.pi * c1) * (1.0 - c2 ** 2)
        zeros = np.zeros((2,) + grid.node_shape)
        diagnostics = pressure_gradient_diagnostics(
            ChannelField(grid, velocity), pressure, zeros, zeros, cls.PARAMS
        )
        return diagnostics.necas_ratio

    def test_ratio_is_finite_and_converges(self):
        ratios = [self.ratio(n) for n in (16, 32, 64)]
        for ratio in ratios:
            self.assertTrue(math.isfinite(ratio))
            self.assertGreater(ratio, 0.0)
        self.assertLess(abs(ratios[2] - ratios[1]), abs(ratios[1] - ratios[0]))
        self.assertLessEqual(abs(ratios[2] - ratios[1]) / ratios[2], 0.05)


class TestProjection(unittest.TestCase):
    """Discrete Leray projection of the channel."""

    def test_projection_is_idempotent(self):
        grid = ChannelGrid(16, 16)
        x1, x2 = grid.node_coordinates()
        bump = 1.0 - x2 ** 2
        velocity = np.stack(
            [bump * np.cos(math.pi * x1), bump * (np.sin(math.pi * x1) + x2 ** 2)]
        )
        projected, phi = project(velocity, grid)
        self.assertLessEqual(
            float(np.max(np.abs(cc.staggered_divergence(projected, grid)))), 1e-10
        )
        again, _ = project(projected, grid)
        np.testing.assert_allclose(again, projected, rtol=0, atol=1e-10)
        self.assertAlmostEqual(float(np.mean(phi)), 0.0, places=12)


if __name__ == '__main__':
    unittest.main()
