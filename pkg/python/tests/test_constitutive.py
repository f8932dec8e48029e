#!/usr/bin/env python3
"""
Unit tests for the stress law, its Jacobian and the sampled constants.
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

# Add the src directory to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from constitutive.inequalities import (
    monotonicity_constants,
    potential_bound_constant,
    relation_band,
)
from constitutive.stress_tensor import (
    monotonicity_bracket,
    potential_grid,
    potential_scalar,
    stress,
    stress_directional_derivative,
    stress_jacobian,
)
from models.errors import DomainError, InvalidInputError, SingularPointError
from models.stress_params import StressParams, SymTensor2

P_VALUES = (1.5, 1.75, 2.0)
DELTA_VALUES = (0.0, 0.1, 1.0)


def _params(p, delta):
    return StressParams(p=p, delta=delta, nu0=1.0, nu1=1.0)


class TestStressParams(unittest.TestCase):
    """Validation of the constitutive constants."""

    def test_rejects_p_outside_range(self):
        with self.assertRaises(DomainError):
            StressParams(p=1.0, delta=0.0, nu0=1.0, nu1=1.0)
        with self.assertRaises(DomainError):
            StressParams(p=2.5, delta=0.0, nu0=1.0, nu1=1.0)

    def test_rejects_negative_delta_and_nan(self):
        with self.assertRaises(DomainError):
            StressParams(p=1.5, delta=-0.1, nu0=1.0, nu1=1.0)
        with self.assertRaises(InvalidInputError):
            StressParams(p=1.5, delta=math.nan, nu0=1.0, nu1=1.0)

    def test_channel_range(self):
        with self.assertRaises(DomainError):
            StressParams(p=1.2, delta=0.1, nu0=1.0, nu1=1.0).require_channel_range()
        StressParams(p=1.5, delta=0.1, nu0=1.0, nu1=1.0).require_channel_range()

    def test_dict_roundtrip_keys(self):
        params = StressParams(p=1.6, delta=0.2, nu0=0.5, nu1=2.0)
        self.assertEqual(StressParams.from_dict(params.to_dict()), params)
        with self.assertRaises(InvalidInputError):
            StressParams.from_dict({'p': 1.5})


class TestStress(unittest.TestCase):
    """Pointwise stress law."""

    def test_zero_tensor_gives_zero_stress(self):
        for p in P_VALUES:
            for delta in DELTA_VALUES:
                self.assertEqual(
                    stress(SymTensor2.zero(), _params(p, delta)), SymTensor2.zero()
                )

    def test_newtonian_case_is_identity(self):
        D = SymTensor2(0.3, -1.2, 2.0)
        self.assertEqual(stress(D, _params(2.0, 0.7)), D)

    def test_shear_thinning_value(self):
        # |D| = sqrt(1 + 2 * 0 + 1) = sqrt(2)
        D = SymTensor2(1.0, 0.0, -1.0)
        S = stress(D, _params(1.5, 0.0))
        expected = 2.0 ** -0.25
        self.assertAlmostEqual(S.d11, expected, places=14)
        self.assertAlmostEqual(S.d22, -expected, places=14)

    def test_non_finite_input_rejected(self):
        with self.assertRaises(InvalidInputError):
            stress(SymTensor2(math.inf, 0.0, 0.0), _params(1.5, 0.1))

    def test_jacobian_singular_point(self):
        with self.assertRaises(SingularPointError):
            stress_jacobian(SymTensor2.zero(), _params(1.5, 0.0))
        # with delta > 0 the Jacobian at zero is delta^(p-2) times the identity
        jac = stress_jacobian(SymTensor2.zero(), _params(1.5, 0.25))
        self.assertAlmostEqual(jac[0, 0, 0, 0], 0.25 ** -0.5, places=12)

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        h = 1e-6
        for p in P_VALUES:
            for delta in DELTA_VALUES:
                params = _params(p, delta)
                for _ in range(50):
                    D = SymTensor2.from_matrix(rng.uniform(-3, 3, (2, 2)))
                    C = SymTensor2.from_matrix(rng.uniform(-3, 3, (2, 2)))
                    plus = stress(
                        SymTensor2(
                            D.d11 + h * C.d11, D.d12 + h * C.d12, D.d22 + h * C.d22
                        ),
                        params,
                    )
                    minus = stress(
                        SymTensor2(
                            D.d11 - h * C.d11, D.d12 - h * C.d12, D.d22 - h * C.d22
                        ),
                        params,
                    )
                    numeric = (plus.as_matrix() - minus.as_matrix()) / (2.0 * h)
                    analytic = np.einsum(
                        'ijkl,kl->ij', stress_jacobian(D, params), C.as_matrix()
                    )
                    scale = max(1.0, np.max(np.abs(analytic)))
                    self.assertLessEqual(
                        np.max(np.abs(numeric - analytic)) / scale, 1e-5
                    )


class TestInequalities(unittest.TestCase):
    """Coercivity, growth and monotonicity on sampled tensors."""

    def test_directional_derivative_bounds(self):
        rng = np.random.default_rng(5)
        for p in P_VALUES:
            for delta in DELTA_VALUES:
                params = _params(p, delta)
                for _ in range(500):
                    D = SymTensor2.from_matrix(rng.uniform(-5, 5, (2, 2)))
                    C = SymTensor2.from_matrix(rng.uniform(-5, 5, (2, 2)))
                    _, ok = stress_directional_derivative(D, C, params)
                    self.assertTrue(ok, f"bound failed for p={p}, delta={delta}")

    def test_newtonian_bracket_ratios_are_one(self):
        rng = np.random.default_rng(2)
        params = _params(2.0, 0.0)
        for _ in range(100):
            bracket = monotonicity_bracket(
                rng.uniform(-5, 5, (2, 2)), rng.uniform(-5, 5, (2, 2)), params
            )
            dot, norm = bracket.ratios()
            self.assertAlmostEqual(dot, 1.0, delta=1e-12)
            self.assertAlmostEqual(norm, 1.0, delta=1e-12)

    def test_equal_arguments_give_empty_bracket(self):
        A = np.array([[1.0, 2.0], [0.0, -1.0]])
        bracket = monotonicity_bracket(A, A, _params(1.5, 0.1))
        self.assertEqual(bracket.equivalent, 0.0)
        self.assertTrue(math.isnan(bracket.ratios()[0]))

    def test_sampled_monotonicity_constants_positive(self):
        for p in P_VALUES:
            for delta in DELTA_VALUES:
                constants = monotonicity_constants(_params(p, delta), samples=5_000)
                self.assertGreater(constants.c0, 0.0)
                self.assertGreaterEqual(constants.c1, constants.c0)
                self.assertTrue(math.isfinite(constants.c1))

    def test_relation_band_is_finite_and_positive(self):
        band = relation_band(1.5, samples=5_000)
        self.assertGreater(band.lower, 0.0)
        self.assertTrue(math.isfinite(band.upper))
        with self.assertRaises(DomainError):
            relation_band(0.9)

    def test_potential_bound_constant(self):
        self.assertAlmostEqual(
            potential_bound_constant(_params(1.5, 0.0), samples=1_000),
            1.0 / 1.5,
            places=12,
        )
        self.assertLessEqual(
            potential_bound_constant(_params(1.5, 0.5), samples=1_000),
            1.0 / 1.5 + 1e-12,
        )

    @pytest.mark.slow
    def test_full_sample_suite(self):
        for p in P_VALUES:
            for delta in DELTA_VALUES:
                constants = monotonicity_constants(_params(p, delta), samples=100_000)
                self.assertGreater(constants.c0, 0.0)


class TestPotential(unittest.TestCase):
    """M(t) = integral of (delta + s)^(p-2) s."""

    def test_matches_quadrature(self):
        for p in P_VALUES:
            for delta in (0.1, 1.0):
                params = _params(p, delta)
                for t in (1e-6, 1e-3, 0.5, 3.0):
                    expected, _ = quad(
                        lambda s: (delta + s) ** (p - 2.0) * s,
                        0.0,
                        t,
                        epsabs=0.0,
                        epsrel=1e-13,
                    )
                    self.assertAlmostEqual(
                        potential_scalar(t, params) / expected, 1.0, delta=1e-8
                    )

    def test_delta_zero_closed_form(self):
        self.assertAlmostEqual(
            potential_scalar(2.0, _params(1.5, 0.0)), 2.0 ** 1.5 / 1.5, places=13
        )

    def test_vectorized_agrees_with_scalar(self):
        params = _params(1.75, 0.2)
        t = np.array([0.0, 1e-5, 0.1, 2.0])
        values = potential_grid(t, params)
        for ti, vi in zip(t, values):
            self.assertAlmostEqual(
                potential_scalar(float(ti), params), float(vi), places=14
            )

    def test_negative_argument_rejected(self):
        with self.assertRaises(InvalidInputError):
            potential_scalar(-1.0, _params(1.5, 0.1))


if __name__ == '__main__':
    unittest.main()
