#!/usr/bin/env python3
"""
Unit tests for running integrals, functionals, the energy balance and
the uniqueness-criterion check.
"""

import math
import sys
import unittest
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd

# Add the src directory to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from models.errors import DomainError, InvalidInputError
from models.regularity_report import LadderEntry, RegularityReport
from models.run_config import ForcingSpec, SolverConfig
from models.stress_params import StressParams
from models.torus_field import TorusField, TorusGrid
from monitors.accumulators import weighted_accumulator_update
from monitors.dashti_robinson import (
    INCONCLUSIVE,
    SATISFIED,
    VIOLATED,
    DRThresholds,
    dashti_robinson_check,
)
from monitors.energy import energy_balance_residual
from monitors.functionals import (
    du_lp_norm,
    functional_I,
    functional_I1,
    functional_J,
    functional_M,
    functional_pair,
    stress_power,
    stress_rate_pairing,
)
from monitors.stability import (
    calibrate_w2l_constant,
    gronwall_check,
    gronwall_constant,
    perturbation_run,
    w2l_ratio,
    w2l_shape_check,
)
from solvers.forcing import torus_forcing
from solvers.initial_data import spectrum_field, taylor_green
from solvers.torus_solver import TorusSolver
from utils.math_utils import MathUtils

PI_SQ = math.pi ** 2


def _report(rows, refinement=None):
    report = RegularityReport('torus')
    for row in rows:
        report.append(row)
    report.refinement = refinement or []
    return report


def _rung(resolution, h2_scale):
    times = [0.0, 0.5, 1.0]
    return LadderEntry(
        resolution, times, [1.0, 0.8, 0.6], [h2_scale * v for v in (2.0, 1.5, 1.0)]
    )


class TestAccumulators(unittest.TestCase):
    """Trapezoidal running integrals."""

    def test_single_sample_integrates_to_zero(self):
        report = weighted_accumulator_update(RegularityReport(), 'a', 0.3, 5.0)
        self.assertEqual(report.accumulated('a'), 0.0)

    def test_trapezoid_is_exact_for_linear_integrands(self):
        report = RegularityReport()
        for t in np.linspace(0.0, 1.0, 11):
            weighted_accumulator_update(report, 'plain', t, 2.0)
            weighted_accumulator_update(report, 'weighted', t, 1.0, 'linear_t')
        self.assertAlmostEqual(report.accumulated('plain'), 2.0, places=14)
        self.assertAlmostEqual(report.accumulated('weighted'), 0.5, places=14)

    def test_rejects_bad_samples(self):
        report = RegularityReport()
        weighted_accumulator_update(report, 'a', 1.0, 1.0)
        with self.assertRaises(InvalidInputError):
            weighted_accumulator_update(report, 'a', 0.5, 1.0)
        with self.assertRaises(InvalidInputError):
            weighted_accumulator_update(report, 'a', 2.0, math.inf)
        with self.assertRaises(InvalidInputError):
            weighted_accumulator_update(report, 'a', 2.0, 1.0, 'quadratic')


class TestRegularityReport(unittest.TestCase):
    """Row bookkeeping."""

    def test_missing_columns_are_nan(self):
        report = _report([{'t': 0.0, 'l2_norm': 1.0}])
        self.assertTrue(math.isnan(report.column('h2_norm')[0]))
        self.assertEqual(
            list(report.to_frame().columns)[:3], ['t', 'l2_norm', 'grad_l2_norm']
        )

    def test_rejects_unknown_columns_and_time_regression(self):
        report = _report([{'t': 1.0}])
        with self.assertRaises(InvalidInputError):
            report.append({'t': 2.0, 'vorticity': 1.0})
        with self.assertRaises(InvalidInputError):
            report.append({'t': 0.5})
        with self.assertRaises(InvalidInputError):
            report.append({'l2_norm': 1.0})

    def test_frame_roundtrip_detects_channel(self):
        channel = RegularityReport('channel')
        channel.append({'t': 0.0, 'alpha1_min': 0.5})
        rebuilt = RegularityReport.from_frame(channel.to_frame())
        self.assertEqual(rebuilt.geometry, 'channel')
        self.assertEqual(rebuilt.column('alpha1_min')[0], 0.5)
        with self.assertRaises(InvalidInputError):
            RegularityReport.from_frame(pd.DataFrame({'x': [1.0]}))

    def test_ladder_entry_dict(self):
        entry = _rung(32, 1.0)
        self.assertEqual(LadderEntry.from_dict(entry.to_dict()), entry)
        with self.assertRaises(InvalidInputError):
            LadderEntry.from_dict({'resolution': 16})


class TestFunctionals(unittest.TestCase):
    """Closed forms on the Taylor-Green field with unit stress weight."""

    def setUp(self):
        self.grid = TorusGrid(16)
        self.u = TorusField.from_physical(
            self.grid, taylor_green(self.grid), solenoidal=True
        )
        self.params = StressParams(p=2.0, delta=1.0, nu0=0.1, nu1=0.2)

    def test_gradient_functionals(self):
        self.assertAlmostEqual(
            functional_I(self.u, self.params), 4.0 * PI_SQ, places=10
        )
        self.assertAlmostEqual(
            functional_I1(self.u, self.params), 2.0 * PI_SQ, places=10
        )
        full, tangential = functional_pair(self.u, self.params)
        self.assertAlmostEqual(full, 4.0 * PI_SQ, places=10)
        self.assertAlmostEqual(tangential, 2.0 * PI_SQ, places=10)

    def test_potential_and_power(self):
        self.assertAlmostEqual(functional_M(self.u, self.params), PI_SQ, places=10)
        self.assertAlmostEqual(
            stress_power(self.u, self.params), 2.0 * PI_SQ, places=10
        )
        self.assertAlmostEqual(
            du_lp_norm(self.u, 2.0), math.pi * math.sqrt(2.0), places=12
        )
        self.assertAlmostEqual(
            functional_J(self.u, self.u, self.params), 2.0 * PI_SQ, places=10
        )
        self.assertAlmostEqual(
            stress_rate_pairing(self.u, self.u, self.params), 2.0 * PI_SQ, places=10
        )

    def test_potential_bounded_by_lp_norm(self):
        params = StressParams(p=1.5, delta=0.3, nu0=0.1, nu1=0.2)
        u = spectrum_field(self.grid, 1.2, 1.0, seed=4)
        self.assertGreaterEqual(functional_M(u, params), 0.0)
        self.assertLessEqual(
            functional_M(u, params), du_lp_norm(u, 1.5) ** 1.5 / 1.5 * (1.0 + 1e-10)
        )

    def test_potential_outside_bound_is_an_error(self):
        params = StressParams(p=1.5, delta=0.3, nu0=0.1, nu1=0.2)
        u = spectrum_field(self.grid, 1.2, 1.0, seed=4)
        with mock.patch(
            'monitors.functionals.potential_grid', side_effect=lambda t, _: -t
        ):
            with self.assertRaises(DomainError):
                functional_M(u, params)
        with mock.patch(
            'monitors.functionals.potential_grid', side_effect=lambda t, _: t ** 1.5
        ):
            with self.assertRaises(DomainError):
                functional_M(u, params)


class TestEnergyBalance(unittest.TestCase):
    """Energy equality on the analytic Taylor-Green decay."""

    def test_residual_of_analytic_decay(self):
        nu0, nu1 = 0.1, 0.2
        rate = 2.0 * (nu0 + 0.5 * nu1)
        t = np.linspace(0.0, 1.0, 1001)
        l2_sq = 2.0 * PI_SQ * np.exp(-2.0 * rate * t)
        grad_sq = 2.0 * l2_sq
        residual = energy_balance_residual(
            math.sqrt(l2_sq[0]),
            math.sqrt(l2_sq[-1]),
            t,
            grad_sq,
            0.5 * grad_sq,
            np.zeros_like(t),
            nu0,
            nu1,
        )
        self.assertLessEqual(residual / (0.5 * l2_sq[0]), 1e-6)

    def test_single_sample_and_length_mismatch(self):
        self.assertEqual(
            energy_balance_residual(1.0, 1.0, [0.0], [1.0], [1.0], [0.0], 0.1, 0.2), 0.0
        )
        with self.assertRaises(InvalidInputError):
            energy_balance_residual(
                1.0, 1.0, [0.0, 1.0], [1.0], [1.0, 1.0], [0.0, 0.0], 0.1, 0.2
            )


class TestDashtiRobinsonCheck(unittest.TestCase):
    """Verdict rules of the uniqueness criterion."""

    def _finest(self, int_l2_p=1.0, int_t_h2_sq=1.0):
        start = {
            't': 0.0,
            'l2_norm': 1.0,
            'h2_norm': 1.0,
            'int_l2_p': 0.0,
            'int_t_h2_sq': 0.0,
        }
        end = {
            't': 1.0,
            'l2_norm': 1.0,
            'h2_norm': 1.0,
            'int_l2_p': int_l2_p,
            'int_t_h2_sq': int_t_h2_sq,
        }
        return [start, end]

    def test_single_run_is_inconclusive(self):
        verdict = dashti_robinson_check(_report(self._finest()), 1.5)
        self.assertEqual(verdict.verdict, INCONCLUSIVE)

    def test_zero_run_is_satisfied(self):
        columns = ('t', 'l2_norm', 'h2_norm', 'int_l2_p', 'int_t_h2_sq')
        zero = dict.fromkeys(columns, 0.0)
        rows = [zero]
        self.assertEqual(dashti_robinson_check(_report(rows), 1.5).verdict, SATISFIED)

    def test_non_finite_integral_is_violated(self):
        verdict = dashti_robinson_check(
            _report(self._finest(int_t_h2_sq=math.inf)), 1.5
        )
        self.assertEqual(verdict.verdict, VIOLATED)

    def test_settled_ladder_is_satisfied(self):
        ladder = [_rung(16, 1.0), _rung(32, 1.01), _rung(64, 1.02)]
        verdict = dashti_robinson_check(_report(self._finest(), ladder), 1.5)
        self.assertEqual(verdict.verdict, SATISFIED)
        self.assertEqual(verdict.resolutions, [16, 32, 64])
        self.assertLessEqual(verdict.changes['int_t_h2_sq'], 0.05)
        self.assertEqual(verdict.to_dict()['verdict'], SATISFIED)

    def test_growing_ladder_is_violated(self):
        ladder = [_rung(16, 1.0), _rung(32, 2.0), _rung(64, 4.0)]
        verdict = dashti_robinson_check(_report(self._finest(), ladder), 1.5)
        self.assertEqual(verdict.verdict, VIOLATED)
        self.assertIn('int_t_h2_sq', verdict.reason)

    def test_moderate_change_is_inconclusive(self):
        ladder = [_rung(16, 1.0), _rung(32, 1.1)]
        verdict = dashti_robinson_check(
            _report(self._finest(), ladder), 1.5, DRThresholds(0.05, 0.5)
        )
        self.assertEqual(verdict.verdict, INCONCLUSIVE)

    def test_argument_checks(self):
        with self.assertRaises(InvalidInputError):
            dashti_robinson_check(_report(self._finest()), 1.0)
        sparse = RegularityReport.from_frame(pd.DataFrame({'t': [0.0]}))
        with self.assertRaises(InvalidInputError):
            dashti_robinson_check(sparse, 1.5)


class TestStabilityEstimates(unittest.TestCase):
    """Perturbation envelope and second-derivative bound."""

    def setUp(self):
        self.grid = TorusGrid(16)
        self.params = StressParams(p=1.5, delta=0.1, nu0=0.1, nu1=0.2)
        config = SolverConfig(dt=1e-3, T=0.01)
        self.solver = TorusSolver(
            self.grid, self.params, config, torus_forcing(ForcingSpec(), self.grid)
        )
        self.reference = spectrum_field(self.grid, 1.5, 1.0, seed=2)

    def test_gronwall_envelope_holds_for_other_perturbation_sizes(self):
        calibration = perturbation_run(
            self.solver, self.reference, 1e-4, steps=10, dt=1e-3
        )
        self.assertAlmostEqual(calibration.eps, 1e-4, delta=1e-12)
        constant = gronwall_constant(calibration)
        self.assertGreaterEqual(constant, 0.0)
        self.assertTrue(gronwall_check(calibration, constant, margin=1.0 + 1e-9))
        other = perturbation_run(self.solver, self.reference, 1e-6, steps=10, dt=1e-3)
        self.assertTrue(gronwall_check(other, constant))

    def test_perturbation_run_arguments(self):
        with self.assertRaises(InvalidInputError):
            perturbation_run(self.solver, self.reference, 0.0, steps=10, dt=1e-3)

    def test_w2l_shape_check(self):
        fields = [spectrum_field(self.grid, 2.0, 1.0, seed) for seed in range(3)]
        constant = calibrate_w2l_constant(fields, self.params, 1.5)
        self.assertGreater(constant, 0.0)
        self.assertTrue(w2l_shape_check(fields, self.params, 1.5, constant).passed)
        with self.assertRaises(InvalidInputError):
            calibrate_w2l_constant([], self.params, 1.5)
        with self.assertRaises(InvalidInputError):
            w2l_ratio(fields[0], self.params, 1.0)

    def test_w2l_ratio_of_zero_field(self):
        params = StressParams(p=1.5, delta=0.0, nu0=0.1, nu1=0.2)
        self.assertEqual(w2l_ratio(TorusField.zeros(self.grid), params, 1.5), 0.0)


class TestMathUtils(unittest.TestCase):
    """Convergence helpers."""

    def test_observed_order(self):
        steps = [0.1, 0.05, 0.025]
        self.assertAlmostEqual(
            MathUtils.observed_order([s ** 2 for s in steps], steps), 2.0, places=10
        )
        with self.assertRaises(ValueError):
            MathUtils.observed_order([1.0], [0.1])

    def test_relative_change_and_growth(self):
        self.assertEqual(MathUtils.relative_change(0.0, 0.0), 0.0)
        self.assertEqual(MathUtils.relative_change(0.0, 1.0), math.inf)
        self.assertAlmostEqual(MathUtils.growth(2.0, 1.0), -0.5)
        self.assertAlmostEqual(
            MathUtils.trapezoid_integral([1.0, 1.0], [0.0, 2.0], weighted=True), 2.0
        )


if __name__ == '__main__':
    unittest.main()
