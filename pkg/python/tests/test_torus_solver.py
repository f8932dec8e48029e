#!/usr/bin/env python3
"""
Unit tests for the torus time integrator.
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

# Add the src directory to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from models.channel_field import ChannelGrid
from models.errors import DomainError, InvalidInputError, RejectedStepError
from models.run_config import ForcingSpec, InitialSpec, SolverConfig
from models.stress_params import StressParams
from models.torus_field import TorusGrid
from solvers.forcing import channel_forcing, torus_forcing
from solvers.initial_data import channel_initial, torus_initial
from solvers.torus_solver import TorusSolver, stabilization_coefficient

NEWTONIAN = StressParams(p=2.0, delta=0.0, nu0=0.1, nu1=0.2)
TAYLOR_GREEN = InitialSpec(kind='taylor-green')


def _solver(params=NEWTONIAN, n=16, forcing=None, cutoff=None, **config):
    grid = TorusGrid(n)
    solver_config = SolverConfig(**{'dt': 1e-2, 'T': 0.5, **config})
    return TorusSolver(
        grid,
        params,
        solver_config,
        torus_forcing(forcing or ForcingSpec(), grid),
        cutoff=cutoff,
    )


class TestStabilization(unittest.TestCase):
    """Implicit stabilization coefficient."""

    def test_coefficient(self):
        self.assertAlmostEqual(stabilization_coefficient(NEWTONIAN, 1.0), 0.1)
        params = StressParams(p=1.5, delta=0.25, nu0=0.1, nu1=0.2)
        self.assertAlmostEqual(stabilization_coefficient(params, 1.0), 0.1 * 2.0)
        # the delta^(p-2) factor is capped
        tiny = StressParams(p=1.5, delta=1e-6, nu0=0.1, nu1=0.2)
        self.assertAlmostEqual(stabilization_coefficient(tiny, 0.5), 0.5 * 0.1 * 10.0)


class TestTorusSolver(unittest.TestCase):
    """Decay, balance and failure behavior."""

    def test_taylor_green_decay(self):
        for diffusion, tolerance in (
            ('integrating-factor', 1e-10), ('crank-nicolson', 1e-6)
        ):
            run = _solver(diffusion=diffusion).run(TAYLOR_GREEN)
            l2 = run.report.column('l2_norm')
            t = run.report.column('t')
            expected = l2[0] * np.exp(-2.0 * NEWTONIAN.newtonian_viscosity * t)
            self.assertLessEqual(
                float(np.max(np.abs(l2 - expected) / expected)), tolerance, diffusion
            )

    def test_energy_residual_is_small(self):
        run = _solver(T=1.0).run(TAYLOR_GREEN)
        energy = 0.5 * run.report.column('l2_norm')[0] ** 2
        self.assertLessEqual(run.report.column('energy_residual')[-1] / energy, 1e-4)

    def test_runs_are_deterministic(self):
        params = StressParams(p=1.5, delta=1.0, nu0=0.1, nu1=0.2)
        spec = InitialSpec(kind='spectrum', alpha=1.1)
        first = _solver(params, dt=1e-3, T=0.02, seed=7).run(spec).report.to_frame()
        second = _solver(params, dt=1e-3, T=0.02, seed=7).run(spec).report.to_frame()
        pd.testing.assert_frame_equal(first, second, check_exact=True)

    def test_shear_thinning_energy_decays(self):
        params = StressParams(p=1.5, delta=1.0, nu0=0.1, nu1=0.2)
        run = _solver(params, dt=1e-3, T=0.05).run(
            InitialSpec(kind='spectrum', alpha=1.1)
        )
        l2 = run.report.column('l2_norm')
        self.assertTrue(np.all(np.diff(l2) <= 1e-12 * l2[0]))
        energy = 0.5 * l2[0] ** 2
        self.assertLessEqual(run.report.column('energy_residual')[-1] / energy, 1e-3)

    def test_zero_final_time_gives_initial_sample_only(self):
        run = _solver(T=0.0).run(TAYLOR_GREEN)
        self.assertEqual(len(run.report), 1)
        self.assertEqual(len(run.snapshots), 1)
        self.assertEqual(run.report.column('t')[0], 0.0)

    def test_strides(self):
        run = _solver(T=0.25, snapshot_stride=10, monitor_stride=5).run(TAYLOR_GREEN)
        np.testing.assert_allclose(
            run.report.column('t'), [0.0, 0.05, 0.1, 0.15, 0.2, 0.25]
        )
        np.testing.assert_allclose([t for t, _ in run.snapshots], [0.0, 0.1, 0.2, 0.25])

    def test_inviscid_newtonian_part_requires_explicit_scheme(self):
        params = StressParams(p=2.0, delta=0.0, nu0=0.0, nu1=0.2)
        with self.assertRaises(DomainError):
            _solver(params)
        run = _solver(params, scheme='rk3-fully-explicit', T=0.2).run(TAYLOR_GREEN)
        l2 = run.report.column('l2_norm')
        expected = l2[0] * math.exp(-2.0 * 0.1 * 0.2)
        self.assertLessEqual(abs(l2[-1] - expected) / expected, 1e-8)

    def test_cutoff_limit(self):
        with self.assertRaises(DomainError):
            _solver(cutoff=6)
        self.assertEqual(_solver(cutoff=3).cutoff, 3)
        self.assertEqual(_solver().cutoff, 5)

    def test_file_kinds_need_a_path(self):
        grid = TorusGrid(8)
        with self.assertRaises(InvalidInputError):
            torus_initial(InitialSpec(kind='snapshot'), grid)
        with self.assertRaises(InvalidInputError):
            torus_forcing(ForcingSpec(kind='file'), grid)
        channel = ChannelGrid(8, 8)
        with self.assertRaises(InvalidInputError):
            channel_initial(InitialSpec(kind='snapshot'), channel)
        with self.assertRaises(InvalidInputError):
            channel_forcing(ForcingSpec(kind='file'), channel)

    def test_cfl_rejection_flushes_partial_report(self):
        partial = {}
        solver = _solver(dt=0.1, T=1.0)
        with self.assertRaises(RejectedStepError) as ctx:
            solver.run(InitialSpec(kind='taylor-green', amplitude=100.0),
                       on_failure=lambda report: partial.setdefault('report', report))
        self.assertEqual(ctx.exception.time, 0.0)
        self.assertEqual(len(partial['report']), 1)

    def test_kolmogorov_forcing_approaches_steady_shear(self):
        forcing = ForcingSpec(kind='kolmogorov', amplitude=1.0, wavenumber=1)
        run = _solver(forcing=forcing, T=1.0).run(InitialSpec(kind='zero'))
        nu = NEWTONIAN.newtonian_viscosity
        amplitude = (1.0 - math.exp(-nu)) / nu
        l2 = run.report.column('l2_norm')
        self.assertAlmostEqual(
            l2[-1] / (amplitude * math.pi * math.sqrt(2.0)), 1.0, delta=1e-3
        )
        energy = 0.5 * l2[-1] ** 2
        self.assertLessEqual(run.report.column('energy_residual')[-1] / energy, 1e-3)
        self.assertGreater(run.report.column('forcing_power')[-1], 0.0)


if __name__ == '__main__':
    unittest.main()
