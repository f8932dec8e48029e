#!/usr/bin/env python3
"""
Unit tests for loading and validating TOML run configurations.
"""

import json
import sys
import tempfile
import textwrap
import unittest
from dataclasses import replace
from pathlib import Path

# Add the src directory to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from data.config_loader import ConfigLoader
from data.config_validator import ConfigValidator
from models.errors import ConfigSyntaxError, ConfigValidationError, InvalidInputError

FIXTURES = Path(__file__).parent / 'fixtures'
RECIPES = Path(__file__).parent.parent.parent / 'recipes'

MINIMAL_TORUS = """
    geometry = "torus"

    [params]
    p = 1.5
    delta = 0.1
    nu0 = 0.1
    nu1 = 0.2

    [grid]
    n = 16

    [time]
    dt = 0.01
    T = 0.5
"""


class ConfigTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text, name='run.toml'):
        path = self.dir / name
        path.write_text(textwrap.dedent(text), encoding='utf-8')
        return path

    def violations(self, text):
        with self.assertRaises(ConfigValidationError) as ctx:
            ConfigLoader.parse_config(self.write(text))
        return ctx.exception.violations


class TestConfigLoader(ConfigTestCase):
    """Parsing and defaults."""

    def test_minimal_torus_defaults(self):
        config = ConfigLoader.parse_config(self.write(MINIMAL_TORUS))
        self.assertEqual(config.geometry, 'torus')
        self.assertEqual(config.params.p, 1.5)
        self.assertEqual(config.grid.n, 16)
        self.assertIsNone(config.grid.cutoff)
        self.assertEqual(config.solver.seed, 0)
        self.assertEqual(config.solver.scheme, 'imex-cn-ab2')
        self.assertEqual(config.solver.diffusion, 'integrating-factor')
        self.assertEqual(config.solver.steps, 50)
        self.assertEqual(config.initial.kind, 'zero')
        self.assertEqual(config.forcing.kind, 'zero')
        self.assertEqual(config.output.directory, 'shearflow_out')
        self.assertIsNone(config.trace)
        self.assertEqual(config.dr_exponent, 1.5)
        self.assertFalse(config.parallel)

    def test_syntax_error_carries_line(self):
        path = self.write("""\
            geometry = "torus"
            [params]
            p = = 1.5
        """)
        with self.assertRaises(ConfigSyntaxError) as ctx:
            ConfigLoader.parse_config(path)
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn('line 3', str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            ConfigLoader.parse_config(self.dir / 'absent.toml')

    def test_relative_snapshot_path_resolves_against_config(self):
        (self.dir / 'start.sf2d').write_bytes(b'')
        config = ConfigLoader.parse_config(self.write(MINIMAL_TORUS + """
            [initial]
            kind = "snapshot"
            path = "start.sf2d"
        """))
        self.assertEqual(Path(config.initial.path), self.dir / 'start.sf2d')

    def test_trace_section(self):
        config = ConfigLoader.parse_config(self.write(MINIMAL_TORUS + """
            [output]
            snapshot_stride = 5

            [trace]
            points = [[0.5, 0.5], [1.0, 2.0]]
            dt = 0.05
        """))
        self.assertEqual(config.trace.points, [[0.5, 0.5], [1.0, 2.0]])
        self.assertEqual(config.trace.perturbations, 4)
        self.assertEqual(config.trace.dt, 0.05)


class TestConfigValidation(ConfigTestCase):
    """Semantic rules, all reported together."""

    def test_channel_rejects_low_exponent(self):
        violations = self.violations("""
            geometry = "channel"

            [params]
            p = 1.2
            delta = 0.1
            nu0 = 0.1
            nu1 = 0.2

            [grid]
            n1 = 16
            n2 = 16

            [time]
            dt = 0.01
            T = 0.1
        """)
        self.assertEqual(
            violations,
            ["params.p = 1.2 is below 3/2; the channel solver requires p >= 3/2"],
        )

    def test_every_violation_is_listed(self):
        violations = self.violations("""
            geometry = "torus"
            colour = "blue"

            [params]
            p = 3.0
            delta = -1.0
            nu0 = 0.1

            [grid]
            n = 15

            [time]
            dt = 0.03
            T = 0.1
        """)
        expected = [
            "unknown config section or key: colour",
            "missing required field params.nu1",
            "grid.n must be even, got 15",
            "time.T = 0.1 is not a whole number of steps of dt = 0.03",
        ]
        for message in expected:
            self.assertIn(message, violations)
        self.assertEqual(len(violations), len(expected))

    def test_range_violations(self):
        text = MINIMAL_TORUS.replace('p = 1.5', 'p = 2.5')
        violations = self.violations(text.replace('nu0 = 0.1', 'nu0 = 0.0'))
        self.assertIn("params.p must lie in (1, 2], got 2.5", violations)
        self.assertTrue(
            any(v.startswith("params.nu0 must be positive") for v in violations)
        )

    def test_zero_newtonian_viscosity_needs_explicit_scheme(self):
        text = (MINIMAL_TORUS.replace('nu0 = 0.1', 'nu0 = 0.0')
                .replace('T = 0.5', 'T = 0.5\nscheme = "rk3-fully-explicit"'))
        config = ConfigLoader.parse_config(self.write(text))
        self.assertEqual(config.params.nu0, 0.0)

    def test_cutoff_limit(self):
        violations = self.violations(
            MINIMAL_TORUS.replace('n = 16', 'n = 16\ncutoff = 6')
        )
        self.assertEqual(
            violations,
            ["grid.cutoff = 6 exceeds the alias-free limit (n - 1) // 3 = 5"],
        )

    def test_spectrum_data_cutoff_limit(self):
        spectrum = MINIMAL_TORUS + """
            [initial]
            kind = "spectrum"
        """
        violations = self.violations(spectrum.replace('n = 16', 'n = 512'))
        self.assertEqual(
            violations,
            [
                "spectrum initial data needs a cutoff <= 127; n = 512 defaults to 170; "
                "use n <= 384 or set grid.cutoff"
            ],
        )
        violations = self.violations(
            spectrum.replace('n = 16', 'n = 512\ncutoff = 128')
        )
        self.assertEqual(
            violations,
            [
                "grid.cutoff = 128 exceeds 127, "
                "the largest mode of spectrum initial data"
            ],
        )
        violations = self.violations(
            spectrum.replace('n = 16', 'n = 16\nladder = [128, 512]')
        )
        self.assertEqual(len(violations), 1)
        self.assertIn("n = 512 defaults to 170", violations[0])
        config = ConfigLoader.parse_config(
            self.write(spectrum.replace('n = 16', 'n = 512\ncutoff = 100'))
        )
        self.assertEqual(config.grid.cutoff, 100)

    def test_channel_scheme_and_kinds(self):
        violations = self.violations("""
            geometry = "channel"

            [params]
            p = 1.5
            delta = 0.1
            nu0 = 0.1
            nu1 = 0.2

            [grid]
            n1 = 16

            [time]
            dt = 0.01
            T = 0.1
            scheme = "rk3-fully-explicit"

            [initial]
            kind = "taylor-green"
        """)
        self.assertIn("missing required field grid.n2 for geometry channel", violations)
        self.assertTrue(
            any(v.startswith("time.scheme must be one of") for v in violations)
        )
        unavailable = "initial.kind 'taylor-green' is not available"
        self.assertTrue(any(v.startswith(unavailable) for v in violations))

    def test_ladder_rules(self):
        violations = self.violations(
            MINIMAL_TORUS.replace('n = 16', 'n = 16\nladder = [32, 16]')
        )
        self.assertIn(
            "grid.ladder must be strictly increasing, got [32, 16]", violations
        )
        violations = self.violations(
            MINIMAL_TORUS.replace('n = 16', 'n = 16\nladder = [16]')
        )
        self.assertIn("grid.ladder needs at least two resolutions", violations)

    def test_trace_step_above_snapshot_spacing(self):
        violations = self.violations(MINIMAL_TORUS + """
            [output]
            snapshot_stride = 2

            [trace]
            points = [[0.5, 0.5]]
            dt = 0.05
        """)
        self.assertEqual(
            violations, ["trace.dt = 0.05 exceeds the snapshot spacing 0.02"]
        )

    def test_validator_on_raw_settings(self):
        settings = ConfigLoader.with_defaults({'geometry': 'sphere'})
        self.assertEqual(ConfigValidator.validate(settings),
                         ["geometry must be one of ['torus', 'channel'], got 'sphere'"])


class TestExpandPlan(ConfigTestCase):
    """Ladder expansion into per-resolution runs."""

    def test_single_run(self):
        config = ConfigLoader.parse_config(self.write(MINIMAL_TORUS))
        plan = ConfigLoader.expand_plan(config)
        self.assertEqual(len(plan), 1)
        self.assertEqual(plan[0]['directory'], 'shearflow_out')
        self.assertEqual(plan[0]['resolution'], 16)

    def test_missing_grid_dimensions(self):
        config = ConfigLoader.parse_config(self.write(MINIMAL_TORUS))
        with self.assertRaises(InvalidInputError):
            config.grid.channel_shape()
        with self.assertRaises(InvalidInputError):
            replace(config, geometry='channel').resolution
        shaped = replace(config.grid, n1=8, n2=16)
        self.assertEqual(shaped.channel_shape(), (8, 16))

    def test_ladder_plan_matches_golden_file(self):
        text = MINIMAL_TORUS.replace('n = 16', 'n = 16\nladder = [16, 32, 64]') + """
            [output]
            directory = "base"
        """
        plan = ConfigLoader.expand_plan(ConfigLoader.parse_config(self.write(text)))
        with open(FIXTURES / 'ladder_plan.json', 'r', encoding='utf-8') as file:
            expected = json.load(file)
        self.assertEqual(plan, expected)

    def test_channel_ladder_refines_both_directions(self):
        config = ConfigLoader.parse_config(self.write("""
            geometry = "channel"

            [params]
            p = 1.5
            delta = 0.1
            nu0 = 0.1
            nu1 = 0.2

            [grid]
            n1 = 8
            n2 = 8
            ladder = [8, 16]

            [time]
            dt = 0.01
            T = 0.1
        """))
        plan = ConfigLoader.expand_plan(config)
        self.assertEqual(
            [(e['grid']['n1'], e['grid']['n2']) for e in plan], [(8, 8), (16, 16)]
        )


class TestRecipes(unittest.TestCase):
    """The shipped recipes load cleanly."""

    def test_every_recipe_validates(self):
        recipes = sorted(RECIPES.glob('*.toml'))
        self.assertGreaterEqual(len(recipes), 5)
        for path in recipes:
            config = ConfigLoader.parse_config(path)
            self.assertEqual(config.source, str(path))

    def test_ladder_recipe_plan(self):
        config = ConfigLoader.parse_config(RECIPES / 'torus_rough_ladder.toml')
        plan = ConfigLoader.expand_plan(config)
        self.assertEqual([entry['resolution'] for entry in plan], [16, 32, 64])
        self.assertTrue(config.parallel)


if __name__ == '__main__':
    unittest.main()
