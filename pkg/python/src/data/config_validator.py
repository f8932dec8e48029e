#!/usr/bin/env python3
"""
Semantic validation of run configuration settings.
"""

from __future__ import annotations
import math
from pathlib import Path
from typing import Any, Dict, List

from models.run_config import (
    CHANNEL_FORCING_KINDS,
    CHANNEL_INITIAL_KINDS,
    CHANNEL_SCHEMES,
    DIFFUSION_MODES,
    SCHEMES,
    SPECTRUM_MAX_CUTOFF,
    TORUS_FORCING_KINDS,
    TORUS_INITIAL_KINDS,
)
from models.stress_params import CHANNEL_MIN_P
from models.torus_field import max_alias_free_cutoff


class ConfigValidator:
    """
    Checks settings against the preconditions of the solvers.

    Every check appends to a list instead of raising, so a config with
    several mistakes is reported in one pass.
    """

    GEOMETRIES = ['torus', 'channel']

    # Required stress constants
    REQUIRED_PARAMS = ['p', 'delta', 'nu0', 'nu1']

    # Required time stepping fields
    REQUIRED_TIME = ['dt', 'T']

    # Grid keys per geometry
    REQUIRED_GRID = {'torus': ['n'], 'channel': ['n1', 'n2']}

    MIN_RESOLUTION = 4

    @classmethod
    def validate(cls, settings: Dict[str, Any]) -> List[str]:
        """
        Validate defaulted settings.

        Args:
            settings: Output of ConfigLoader.with_defaults

        Returns:
            Every violation found, empty when the settings are valid
        """
        violations: List[str] = []
        for key in settings.get('unknown', []):
            violations.append(f"unknown config section or key: {key}")
        geometry = settings.get('geometry')
        if geometry not in cls.GEOMETRIES:
            violations.append(
                f"geometry must be one of {cls.GEOMETRIES}, got {geometry!r}"
            )
            return violations
        cls._validate_params(settings, violations)
        cls._validate_grid(settings, violations)
        cls._validate_time(settings, violations)
        cls._validate_initial(settings, violations)
        cls._validate_forcing(settings, violations)
        cls._validate_output(settings, violations)
        cls._validate_monitors(settings, violations)
        if settings.get('trace_requested'):
            cls._validate_trace(settings['trace'], violations)
            cls._validate_trace_spacing(settings, violations)
        if not _is_int(settings.get('seed')) or settings['seed'] < 0:
            violations.append(
                f"seed must be a non-negative integer, got {settings.get('seed')!r}"
            )
        return violations

    @classmethod
    def _validate_params(cls, settings: Dict[str, Any], violations: List[str]) -> None:
        params = settings['params']
        for name in cls.REQUIRED_PARAMS:
            if name not in params:
                violations.append(f"missing required field params.{name}")
            elif not _is_number(params[name]):
                violations.append(
                    f"params.{name} must be a finite number, got {params[name]!r}"
                )
        if any(not _is_number(params.get(name)) for name in cls.REQUIRED_PARAMS):
            return
        p = params['p']
        if not 1.0 < p <= 2.0:
            violations.append(f"params.p must lie in (1, 2], got {p}")
        elif settings['geometry'] == 'channel' and p < CHANNEL_MIN_P:
            violations.append(
                f"params.p = {p} is below 3/2; the channel solver requires p >= 3/2"
            )
        for name in ('delta', 'nu1'):
            if params[name] < 0:
                violations.append(
                    f"params.{name} must be non-negative, got {params[name]}"
                )
        explicit_torus = (
            settings['geometry'] == 'torus'
            and settings['time'].get('scheme') == 'rk3-fully-explicit'
        )
        if params['nu0'] < 0 or (params['nu0'] == 0 and not explicit_torus):
            violations.append(
                f"params.nu0 must be positive (nu0 = 0 needs geometry torus with "
                f"scheme rk3-fully-explicit), got {params['nu0']}"
            )

    @classmethod
    def _validate_grid(cls, settings: Dict[str, Any], violations: List[str]) -> None:
        geometry = settings['geometry']
        grid = settings['grid']
        for name in cls.REQUIRED_GRID[geometry]:
            value = grid.get(name)
            if value is None:
                violations.append(
                    f"missing required field grid.{name} for geometry {geometry}"
                )
            elif not _is_int(value) or value < cls.MIN_RESOLUTION:
                violations.append(
                    f"grid.{name} must be an integer >= {cls.MIN_RESOLUTION}, "
                    f"got {value!r}"
                )
            elif value % 2 and name != 'n2':
                violations.append(f"grid.{name} must be even, got {value}")
        cutoff = grid.get('cutoff')
        if cutoff is not None:
            if geometry != 'torus':
                violations.append("grid.cutoff only applies to the torus")
            elif not _is_int(cutoff) or cutoff < 1:
                violations.append(
                    f"grid.cutoff must be a positive integer, got {cutoff!r}"
                )
            elif _is_int(grid.get('n')) and cutoff > (grid['n'] - 1) // 3:
                violations.append(
                    f"grid.cutoff = {cutoff} exceeds the alias-free limit "
                    f"(n - 1) // 3 = {(grid['n'] - 1) // 3}"
                )
        ladder = grid.get('ladder', [])
        if not isinstance(ladder, list) or not all(_is_int(v) for v in ladder):
            violations.append(f"grid.ladder must be a list of integers, got {ladder!r}")
            return
        if ladder and cutoff is not None:
            violations.append(
                "grid.cutoff cannot be combined with a ladder; "
                "each rung uses its own default"
            )
        if len(ladder) == 1:
            violations.append("grid.ladder needs at least two resolutions")
        if any(b <= a for a, b in zip(ladder[:-1], ladder[1:])):
            violations.append(f"grid.ladder must be strictly increasing, got {ladder}")
        for value in ladder:
            if value < cls.MIN_RESOLUTION or value % 2:
                violations.append(
                    f"grid.ladder entries must be even and >= {cls.MIN_RESOLUTION}, "
                    f"got {value}"
                )

    @classmethod
    def _validate_time(cls, settings: Dict[str, Any], violations: List[str]) -> None:
        time = settings['time']
        for name in cls.REQUIRED_TIME:
            if name not in time:
                violations.append(f"missing required field time.{name}")
        dt, t_end = time.get('dt'), time.get('T')
        if 'dt' in time and (not _is_number(dt) or dt <= 0):
            violations.append(f"time.dt must be positive, got {dt!r}")
        if 'T' in time and (not _is_number(t_end) or t_end < 0):
            violations.append(f"time.T must be non-negative, got {t_end!r}")
        if _is_number(dt) and _is_number(t_end) and dt > 0 and t_end >= 0:
            steps = t_end / dt
            if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
                violations.append(
                    f"time.T = {t_end} is not a whole number of steps of dt = {dt}"
                )
        allowed = CHANNEL_SCHEMES if settings['geometry'] == 'channel' else SCHEMES
        if time['scheme'] not in allowed:
            violations.append(
                f"time.scheme must be one of {list(allowed)} for "
                f"{settings['geometry']}, got {time['scheme']!r}"
            )
        if time['diffusion'] not in DIFFUSION_MODES:
            violations.append(
                f"time.diffusion must be one of {list(DIFFUSION_MODES)}, "
                f"got {time['diffusion']!r}"
            )
        for name in ('stabilization', 'cfl_limit'):
            if not _is_number(time[name]) or time[name] < 0:
                violations.append(
                    f"time.{name} must be non-negative, got {time[name]!r}"
                )
        if _is_number(time['cfl_limit']) and time['cfl_limit'] == 0:
            violations.append("time.cfl_limit must be positive")

    @classmethod
    def _validate_initial(
        cls, settings: Dict[str, Any], violations: List[str]
    ) -> None:
        initial = settings['initial']
        torus = settings['geometry'] == 'torus'
        allowed = TORUS_INITIAL_KINDS if torus else CHANNEL_INITIAL_KINDS
        if initial['kind'] not in allowed:
            violations.append(
                f"initial.kind {initial['kind']!r} is not available for "
                f"{settings['geometry']}; choose from {list(allowed)}"
            )
        if not _is_number(initial['amplitude']):
            violations.append(
                f"initial.amplitude must be a finite number, "
                f"got {initial['amplitude']!r}"
            )
        spectrum = initial['kind'] == 'spectrum'
        if spectrum and (not _is_number(initial['alpha']) or initial['alpha'] <= 0):
            violations.append(
                f"initial.alpha must be positive, got {initial['alpha']!r}"
            )
        if spectrum and settings['geometry'] == 'torus':
            cls._validate_spectrum_cutoff(settings['grid'], violations)
        if initial['kind'] == 'snapshot':
            cls._require_file('initial.path', initial.get('path'), violations)

    @classmethod
    def _validate_spectrum_cutoff(
        cls, grid: Dict[str, Any], violations: List[str]
    ) -> None:
        cutoff = grid.get('cutoff')
        if _is_int(cutoff):
            if cutoff > SPECTRUM_MAX_CUTOFF:
                violations.append(
                    f"grid.cutoff = {cutoff} exceeds {SPECTRUM_MAX_CUTOFF}, "
                    f"the largest mode of spectrum initial data"
                )
            return
        ladder = grid.get('ladder') or []
        resolutions = ladder if isinstance(ladder, list) else []
        if not resolutions and _is_int(grid.get('n')):
            resolutions = [grid['n']]
        for n in resolutions:
            if _is_int(n) and max_alias_free_cutoff(n) > SPECTRUM_MAX_CUTOFF:
                violations.append(
                    f"spectrum initial data needs a cutoff "
                    f"<= {SPECTRUM_MAX_CUTOFF}; "
                    f"n = {n} defaults to {max_alias_free_cutoff(n)}; "
                    f"use n <= {3 * SPECTRUM_MAX_CUTOFF + 3} or set grid.cutoff"
                )

    @classmethod
    def _validate_forcing(
        cls, settings: Dict[str, Any], violations: List[str]
    ) -> None:
        forcing = settings['forcing']
        torus = settings['geometry'] == 'torus'
        allowed = TORUS_FORCING_KINDS if torus else CHANNEL_FORCING_KINDS
        if forcing['kind'] not in allowed:
            violations.append(
                f"forcing.kind {forcing['kind']!r} is not available for "
                f"{settings['geometry']}; choose from {list(allowed)}"
            )
        if not _is_number(forcing['amplitude']):
            violations.append(
                f"forcing.amplitude must be a finite number, "
                f"got {forcing['amplitude']!r}"
            )
        components = forcing['components']
        if (
            not isinstance(components, list)
            or len(components) != 2
            or not all(_is_number(c) for c in components)
        ):
            violations.append(
                f"forcing.components must be two numbers, got {components!r}"
            )
        if not _is_int(forcing['wavenumber']) or forcing['wavenumber'] < 1:
            violations.append(
                f"forcing.wavenumber must be a positive integer, "
                f"got {forcing['wavenumber']!r}"
            )
        if forcing['kind'] == 'file':
            cls._require_file('forcing.path', forcing.get('path'), violations)

    @classmethod
    def _validate_output(cls, settings: Dict[str, Any], violations: List[str]) -> None:
        output = settings['output']
        for name in ('snapshot_stride', 'monitor_stride'):
            if not _is_int(output[name]) or output[name] < 1:
                violations.append(
                    f"output.{name} must be an integer >= 1, got {output[name]!r}"
                )
        if not isinstance(output['directory'], str) or not output['directory']:
            violations.append("output.directory must be a non-empty string")

    @classmethod
    def _validate_monitors(
        cls, settings: Dict[str, Any], violations: List[str]
    ) -> None:
        monitors = settings['monitors']
        stable = monitors['stable_threshold']
        divergent = monitors['divergent_threshold']
        ordered = _is_number(stable) and _is_number(divergent)
        if not ordered or not 0 < stable < divergent:
            violations.append(
                f"monitors thresholds must satisfy 0 < stable < divergent, "
                f"got {stable!r} and {divergent!r}"
            )
        exponent = monitors['dr_exponent']
        if exponent is not None and (not _is_number(exponent) or exponent <= 1):
            violations.append(f"monitors.dr_exponent must exceed 1, got {exponent!r}")

    @classmethod
    def _validate_trace(cls, trace: Dict[str, Any], violations: List[str]) -> None:
        points = trace['points']
        if not isinstance(points, list) or not points or not all(
            isinstance(p, list) and len(p) == 2 and all(_is_number(c) for c in p)
            for p in points
        ):
            violations.append("trace.points must be a non-empty list of [x1, x2] pairs")
        for name in ('eps', 'dt'):
            if not _is_number(trace[name]) or trace[name] <= 0:
                violations.append(f"trace.{name} must be positive, got {trace[name]!r}")
        if not _is_int(trace['perturbations']) or trace['perturbations'] < 0:
            violations.append(
                f"trace.perturbations must be a non-negative integer, "
                f"got {trace['perturbations']!r}"
            )
        if trace['T'] is not None and (not _is_number(trace['T']) or trace['T'] < 0):
            violations.append(f"trace.T must be non-negative, got {trace['T']!r}")

    @classmethod
    def _validate_trace_spacing(
        cls, settings: Dict[str, Any], violations: List[str]
    ) -> None:
        trace, time, output = settings['trace'], settings['time'], settings['output']
        values = (trace['dt'], time.get('dt'), time.get('T'))
        positive = all(_is_number(v) and v > 0 for v in values)
        if not positive or not _is_int(output['snapshot_stride']):
            return
        spacing = output['snapshot_stride'] * time['dt']
        if trace['dt'] > spacing * (1.0 + 1e-12):
            violations.append(
                f"trace.dt = {trace['dt']} exceeds the snapshot spacing {spacing:g}"
            )
        if _is_number(trace['T']) and trace['T'] > time['T'] * (1.0 + 1e-12):
            violations.append(
                f"trace.T = {trace['T']} exceeds the run's final time {time['T']}"
            )

    @staticmethod
    def _require_file(name: str, path: Any, violations: List[str]) -> None:
        if not isinstance(path, str) or not path:
            violations.append(f"{name} is required")
        elif not Path(path).is_file():
            violations.append(f"{name} does not exist: {path}")


def _is_number(value: Any) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)
