#!/usr/bin/env python3
"""
Unit tests for velocity interpolation, particle tracing and separation diagnostics.
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

# Add the src directory to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from models.channel_field import ChannelField, ChannelGrid
from models.errors import InvalidInputError
from models.torus_field import TorusField, TorusGrid
from models.trajectory_bundle import BundleSpec
from models.velocity_history import VelocityHistory
from particles.diagnostics import (
    area_drift,
    lipschitz_envelope,
    log_lipschitz_modulus,
    osgood_envelope,
    separation_diagnostics,
    shoelace_area,
)
from particles.interpolation import VelocityInterpolator, interpolate_velocity
from particles.tracer import forward_backward_error, trace
from solvers.initial_data import shear, taylor_green

GRID = TorusGrid(16)


def _frozen(values, t_end=1.0, drift=(0.0, 0.0)):
    return VelocityHistory.frozen(
        TorusField.from_physical(GRID, values, solenoidal=True), t_end, drift
    )


def _decaying_taylor_green(amplitude=2.0, nu=0.1, t_end=2.0, snapshots=11):
    times = np.linspace(0.0, t_end, snapshots)
    fields = [
        TorusField.from_physical(
            GRID,
            amplitude * math.exp(-2.0 * nu * t) * taylor_green(GRID),
            solenoidal=True,
        )
        for t in times
    ]
    return VelocityHistory(times, fields)


class TestBundleSpec(unittest.TestCase):
    """Seeding of perturbation clusters."""

    def test_clusters(self):
        spec = BundleSpec(np.array([[0.0, 0.0], [1.0, 1.0]]), eps=0.1, perturbations=4)
        positions = spec.initial_positions()
        self.assertEqual(positions.shape, (10, 2))
        np.testing.assert_array_equal(spec.cluster_ids(), [0] * 5 + [1] * 5)
        np.testing.assert_allclose(
            np.linalg.norm(positions[1:5] - positions[0], axis=1), 0.1, rtol=1e-14
        )

    def test_rejects_bad_points(self):
        with self.assertRaises(InvalidInputError):
            BundleSpec(np.zeros((3, 3)))
        with self.assertRaises(InvalidInputError):
            BundleSpec(np.array([[math.nan, 0.0]]))
        with self.assertRaises(InvalidInputError):
            BundleSpec(np.zeros((1, 2)), eps=-1.0)


class TestInterpolation(unittest.TestCase):
    """Point evaluation of snapshot histories."""

    def test_constant_field(self):
        history = _frozen(np.zeros((2, 16, 16)), drift=(1.0, 0.0))
        for x, t in (((0.3, 2.0), 0.0), ((5.0, -1.0), 0.7)):
            np.testing.assert_allclose(
                interpolate_velocity(history, x, t), [1.0, 0.0], atol=1e-15
            )

    def test_taylor_green_stagnation_point(self):
        history = _frozen(taylor_green(GRID))
        np.testing.assert_allclose(
            interpolate_velocity(history, (0.0, 0.0), 0.5), [0.0, 0.0], atol=1e-14
        )

    def test_shear_off_grid(self):
        history = _frozen(shear(GRID))
        np.testing.assert_allclose(
            interpolate_velocity(history, (0.0, math.pi / 2.0), 0.2),
            [1.0, 0.0],
            atol=1e-13,
        )
        # between grid points the mode sum is still exact
        np.testing.assert_allclose(
            interpolate_velocity(history, (0.1, 0.123), 0.2),
            [math.sin(0.123), 0.0],
            atol=1e-13,
        )

    def test_bicubic_scheme_is_close(self):
        history = _frozen(taylor_green(GRID))
        x = (0.4, 1.3)
        exact = [math.sin(0.4) * math.cos(1.3), -math.cos(0.4) * math.sin(1.3)]
        np.testing.assert_allclose(
            interpolate_velocity(history, x, 0.0, scheme='bicubic'), exact, atol=1e-3
        )

    def test_linear_in_time_between_snapshots(self):
        history = _decaying_taylor_green(amplitude=1.0, t_end=1.0, snapshots=2)
        x = (0.4, 1.3)
        start = interpolate_velocity(history, x, 0.0)
        end = interpolate_velocity(history, x, 1.0)
        np.testing.assert_allclose(
            interpolate_velocity(history, x, 0.25),
            0.75 * start + 0.25 * end,
            atol=1e-14,
        )

    def test_time_outside_span_rejected(self):
        history = _frozen(shear(GRID))
        with self.assertRaises(InvalidInputError):
            interpolate_velocity(history, (0.0, 0.0), 1.5)
        with self.assertRaises(InvalidInputError):
            interpolate_velocity(history, (0.0, 0.0), 0.0, scheme='nearest')

    def test_channel_points_beyond_wall_are_clamped(self):
        grid = ChannelGrid(8, 16)
        _, x2 = grid.node_coordinates()
        field = ChannelField(grid, np.stack([1.0 - x2 ** 2, np.zeros(grid.node_shape)]))
        interpolator = VelocityInterpolator(VelocityHistory.frozen(field, 1.0))
        velocity, clamped = interpolator(np.array([[0.2, 0.5], [0.2, 1.5]]), 0.5)
        np.testing.assert_array_equal(clamped, [False, True])
        np.testing.assert_allclose(velocity[0], [0.75, 0.0], atol=1e-12)
        np.testing.assert_allclose(velocity[1], [0.0, 0.0], atol=1e-12)


class TestTrace(unittest.TestCase):
    """Runge-Kutta particle paths."""

    def test_uniform_drift(self):
        history = _frozen(np.zeros((2, 16, 16)), drift=(1.0, 0.0))
        bundle = trace(history, BundleSpec(np.array([[0.0, 0.0]])), dt_ode=0.1)
        np.testing.assert_allclose(bundle.final_positions()[0], [1.0, 0.0], atol=1e-14)
        self.assertEqual(bundle.metadata['dtOde'], 0.1)
        self.assertEqual(len(bundle.times), 11)

    def test_stagnation_point_stays_put(self):
        bundle = trace(
            _decaying_taylor_green(), BundleSpec(np.array([[0.0, 0.0]])), dt_ode=0.05
        )
        self.assertLessEqual(float(np.max(np.abs(bundle.paths))), 1e-14)

    def test_paths_are_unwrapped(self):
        history = _frozen(np.zeros((2, 16, 16)), t_end=10.0, drift=(1.0, 0.0))
        bundle = trace(history, BundleSpec(np.array([[0.0, 1.0]])), dt_ode=0.5)
        self.assertAlmostEqual(float(bundle.final_positions()[0, 0]), 10.0, places=12)
        self.assertAlmostEqual(
            float(bundle.wrapped()[-1, 0, 0]), 10.0 - 2.0 * math.pi, places=12
        )
        records = bundle.to_records()
        self.assertEqual(len(records), len(bundle.times))
        self.assertEqual(
            list(records[0]), ['t', 'particle', 'x1', 'x2', 'wrapped_x1', 'wrapped_x2']
        )

    def test_step_above_snapshot_spacing_rejected(self):
        history = _decaying_taylor_green()
        with self.assertRaises(InvalidInputError):
            trace(history, BundleSpec(np.array([[0.5, 0.5]])), dt_ode=0.5)
        with self.assertRaises(InvalidInputError):
            trace(history, BundleSpec(np.array([[0.5, 0.5]])), dt_ode=0.0)

    def test_explicit_sample_times(self):
        spec = BundleSpec(
            np.array([[0.5, 0.5]]), sample_times=np.array([0.0, 0.3, 2.0])
        )
        bundle = trace(_decaying_taylor_green(), spec, dt_ode=0.05)
        np.testing.assert_array_equal(bundle.times, [0.0, 0.3, 2.0])
        bad = BundleSpec(np.array([[0.5, 0.5]]), sample_times=np.array([0.1, 0.3]))
        with self.assertRaises(InvalidInputError):
            trace(_decaying_taylor_green(), bad, dt_ode=0.05)


class TestForwardBackward(unittest.TestCase):
    """Round-trip errors of the tracer."""

    def test_constant_field_returns_exactly(self):
        history = _frozen(np.zeros((2, 16, 16)), drift=(0.3, -0.7))
        result = forward_backward_error(
            history, BundleSpec(np.array([[1.0, 2.0], [3.0, 4.0]])), dt_ode=0.1
        )
        self.assertLessEqual(result.max_error, 1e-14)

    def test_frozen_shear(self):
        spec = BundleSpec(np.array([[0.1, 0.4], [2.0, 1.0], [4.0, 5.5]]))
        result = forward_backward_error(_frozen(shear(GRID)), spec, dt_ode=1e-2)
        self.assertLessEqual(result.max_error, 1e-10)

    def test_convergence_order_on_taylor_green_history(self):
        history = _decaying_taylor_green()
        spec = BundleSpec(np.array([[0.3, 0.7], [1.1, 2.0], [2.5, 0.4]]))
        errors = [
            forward_backward_error(history, spec, dt).max_error
            for dt in (4e-2, 2e-2, 1e-2)
        ]
        self.assertGreater(errors[-1], 0.0)
        for coarse, fine in zip(errors[:-1], errors[1:]):
            self.assertGreaterEqual(math.log2(coarse / fine), 3.5)


class TestSeparation(unittest.TestCase):
    """Envelopes and separation of perturbed particles."""

    def test_log_lipschitz_modulus(self):
        np.testing.assert_allclose(
            log_lipschitz_modulus(np.array([0.0, 1.0, 2.0, math.exp(-1.0)])),
            [0.0, 1.0, 2.0, 2.0 * math.exp(-1.0)],
            rtol=1e-14,
        )

    def test_osgood_envelope_solves_its_equation(self):
        times = np.linspace(0.0, 4.0, 41)
        solution = solve_ivp(
            lambda t, s: 0.8 * s * (1.0 + max(math.log(1.0 / s[0]), 0.0)),
            (0.0, 4.0),
            [1e-3],
            t_eval=times,
            rtol=1e-11,
            atol=1e-14,
        )
        np.testing.assert_allclose(
            osgood_envelope(1e-3, 0.8, times), solution.y[0], rtol=1e-6
        )

    def test_envelope_degenerate_cases(self):
        times = np.linspace(0.0, 1.0, 5)
        np.testing.assert_array_equal(osgood_envelope(0.0, 1.0, times), 0.0)
        np.testing.assert_array_equal(osgood_envelope(0.2, 0.0, times), 0.2)
        np.testing.assert_allclose(
            lipschitz_envelope(0.2, 1.0, times), 0.2 * np.exp(times), rtol=1e-14
        )

    def test_identical_points_never_separate(self):
        bundle = trace(
            _decaying_taylor_green(),
            BundleSpec(np.array([[0.5, 0.5]]), eps=0.0, perturbations=1),
            dt_ode=0.1,
        )
        diagnostics = separation_diagnostics(bundle)
        np.testing.assert_array_equal(diagnostics.separation, 0.0)
        self.assertTrue(diagnostics.within_envelope)

    def test_constant_field_keeps_separation(self):
        history = _frozen(np.zeros((2, 16, 16)), drift=(1.0, 0.5))
        bundle = trace(
            history,
            BundleSpec(np.array([[0.5, 0.5]]), eps=0.01, perturbations=3),
            dt_ode=0.1,
        )
        diagnostics = separation_diagnostics(bundle)
        np.testing.assert_allclose(
            diagnostics.separation, diagnostics.separation[0], rtol=1e-12
        )
        self.assertTrue(diagnostics.within_envelope)

    def test_growth_near_hyperbolic_point(self):
        # the frozen Taylor-Green cell stretches along x1 at rate 1 at the origin
        history = _frozen(taylor_green(GRID))
        bundle = trace(
            history,
            BundleSpec(np.array([[0.0, 0.0]]), eps=1e-5, perturbations=4),
            dt_ode=0.05,
        )
        diagnostics = separation_diagnostics(bundle)
        growth = diagnostics.separation[-1] / diagnostics.separation[0]
        self.assertAlmostEqual(growth / math.e, 1.0, delta=1e-3)
        self.assertAlmostEqual(diagnostics.lipschitz_constant, 1.0, delta=1e-3)
        self.assertTrue(diagnostics.within_envelope)
        self.assertTrue(diagnostics.summary()['withinEnvelope'])
        self.assertEqual(len(diagnostics.to_records()), len(bundle.times))

    def test_single_particle_rejected(self):
        bundle = trace(
            _decaying_taylor_green(), BundleSpec(np.array([[0.5, 0.5]])), dt_ode=0.1
        )
        with self.assertRaises(InvalidInputError):
            separation_diagnostics(bundle)


class TestArea(unittest.TestCase):
    """Tracer polygon areas."""

    def test_shoelace(self):
        square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        self.assertEqual(shoelace_area(square), 1.0)
        self.assertEqual(shoelace_area(square[::-1]), -1.0)

    def test_translation_preserves_area(self):
        history = _frozen(np.zeros((2, 16, 16)), drift=(0.4, 0.9))
        points = np.array([[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])
        bundle = trace(history, BundleSpec(points), dt_ode=0.1)
        self.assertLessEqual(float(np.max(area_drift(bundle, range(4)))), 1e-12)

    def test_degenerate_polygons_rejected(self):
        history = _frozen(np.zeros((2, 16, 16)), drift=(0.4, 0.9))
        bundle = trace(
            history,
            BundleSpec(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])),
            dt_ode=0.1,
        )
        with self.assertRaises(InvalidInputError):
            area_drift(bundle, [0, 1])
        with self.assertRaises(InvalidInputError):
            area_drift(bundle, [0, 1, 2])


if __name__ == '__main__':
    unittest.main()
