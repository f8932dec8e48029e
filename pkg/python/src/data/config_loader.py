#!/usr/bin/env python3
"""
Loading of TOML run configurations.

The loader reads the file, fills defaults, hands the settings to the
validator and only then builds the RunConfig, so every violation is
reported together.
"""

from __future__ import annotations
import logging
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from data.config_validator import ConfigValidator
from models.errors import ConfigSyntaxError, ConfigValidationError
from models.run_config import (
    ForcingSpec,
    GridConfig,
    InitialSpec,
    MonitorConfig,
    OutputConfig,
    RunConfig,
    SolverConfig,
    TraceConfig,
)
from models.stress_params import StressParams

logger = logging.getLogger(__name__)

_LINE_PATTERN = re.compile(r'at line (\d+)')

KNOWN_SECTIONS = (
    'params', 'grid', 'time', 'initial', 'forcing', 'output', 'monitors', 'trace', 'run'
)
TOP_LEVEL_KEYS = ('geometry', 'seed')

DEFAULTS: Dict[str, Dict[str, Any]] = {
    'grid': {'cutoff': None, 'ladder': []},
    'time': {
        'scheme': 'imex-cn-ab2',
        'diffusion': 'integrating-factor',
        'stabilization': 1.0,
        'cfl_limit': 1.0,
    },
    'initial': {'kind': 'zero', 'amplitude': 1.0, 'alpha': 1.1, 'path': None},
    'forcing': {
        'kind': 'zero',
        'amplitude': 1.0,
        'components': [1.0, 0.0],
        'wavenumber': 1,
        'path': None,
    },
    'output': {
        'directory': 'shearflow_out',
        'snapshot_stride': 100,
        'monitor_stride': 1,
        'write_snapshots': True,
    },
    'monitors': {
        'stable_threshold': 0.05,
        'divergent_threshold': 0.5,
        'dr_exponent': None,
    },
    'trace': {'points': [], 'eps': 1e-4, 'dt': 1e-2, 'perturbations': 4, 'T': None},
    'run': {'parallel': False},
}


class ConfigLoader:
    """
    Parses run configuration files into validated RunConfig objects.
    """

    @staticmethod
    def read_toml(path: Union[str, Path]) -> Dict[str, Any]:
        """
        Read a TOML file.

        Raises:
            FileNotFoundError: If the file does not exist
            ConfigSyntaxError: If the file is not valid TOML, with its line number
        """
        config_path = Path(path)
        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")
        try:
            with open(config_path, 'rb') as file:
                return tomllib.load(file)
        except tomllib.TOMLDecodeError as e:
            match = _LINE_PATTERN.search(str(e))
            line = getattr(e, 'lineno', None)
            if line is None and match:
                line = int(match.group(1))
            raise ConfigSyntaxError(f"Invalid TOML in {config_path}: {e}", line) from e

    @staticmethod
    def with_defaults(raw: Dict[str, Any]) -> Dict[str, Any]:
        """Settings with every optional key filled; unknown keys stay for validation."""
        known = KNOWN_SECTIONS + TOP_LEVEL_KEYS
        settings: Dict[str, Any] = {
            'geometry': raw.get('geometry', 'torus'),
            'seed': raw.get('seed', 0),
            'params': dict(raw.get('params', {})),
            'trace_requested': 'trace' in raw,
            'unknown': [key for key in raw if key not in known],
        }
        for section, defaults in DEFAULTS.items():
            given = raw.get(section, {})
            if not isinstance(given, dict):
                settings['unknown'].append(section)
                given = {}
            merged = dict(defaults)
            merged.update(given)
            settings[section] = merged
        return settings

    @classmethod
    def parse_config(cls, path: Union[str, Path]) -> RunConfig:
        """
        Load, validate and build a run configuration.

        Args:
            path: TOML file; relative file references resolve against its directory

        Returns:
            Fully validated RunConfig

        Raises:
            ConfigSyntaxError: Malformed TOML
            ConfigValidationError: One or more semantic violations, all listed
        """
        config_path = Path(path)
        settings = cls.with_defaults(cls.read_toml(config_path))
        cls._resolve_paths(settings, config_path.parent)
        violations = ConfigValidator.validate(settings)
        if violations:
            for violation in violations:
                logger.error("Config violation: %s", violation)
            raise ConfigValidationError(violations)
        config = cls.build(settings, source=str(config_path))
        logger.info("Loaded %s config from %s", config.geometry, config_path)
        return config

    @staticmethod
    def _resolve_paths(settings: Dict[str, Any], base: Path) -> None:
        for section in ('initial', 'forcing'):
            value = settings[section].get('path')
            if isinstance(value, str) and not Path(value).is_absolute():
                settings[section]['path'] = str(base / value)

    @staticmethod
    def build(settings: Dict[str, Any], source: Optional[str] = None) -> RunConfig:
        """Construct the RunConfig from validated settings."""
        params = settings['params']
        grid = settings['grid']
        time = settings['time']
        initial = settings['initial']
        forcing = settings['forcing']
        output = settings['output']
        monitors = settings['monitors']
        trace = settings['trace']
        trace_config = None
        if settings['trace_requested']:
            trace_config = TraceConfig(
                points=[[float(c) for c in p] for p in trace['points']],
                eps=float(trace['eps']),
                dt=float(trace['dt']),
                perturbations=int(trace['perturbations']),
                T=None if trace['T'] is None else float(trace['T']),
            )
        dr_exponent = monitors['dr_exponent']
        return RunConfig(
            geometry=settings['geometry'],
            params=StressParams(
                p=float(params['p']),
                delta=float(params['delta']),
                nu0=float(params['nu0']),
                nu1=float(params['nu1']),
            ),
            grid=GridConfig(
                n=_optional_int(grid.get('n')),
                n1=_optional_int(grid.get('n1')),
                n2=_optional_int(grid.get('n2')),
                cutoff=_optional_int(grid.get('cutoff')),
                ladder=[int(v) for v in grid['ladder']],
            ),
            solver=SolverConfig(
                dt=float(time['dt']),
                T=float(time['T']),
                scheme=time['scheme'],
                diffusion=time['diffusion'],
                stabilization=float(time['stabilization']),
                cfl_limit=float(time['cfl_limit']),
                snapshot_stride=int(output['snapshot_stride']),
                monitor_stride=int(output['monitor_stride']),
                seed=int(settings['seed']),
            ),
            initial=InitialSpec(
                kind=initial['kind'],
                amplitude=float(initial['amplitude']),
                alpha=float(initial['alpha']),
                path=initial['path'],
            ),
            forcing=ForcingSpec(
                kind=forcing['kind'],
                amplitude=float(forcing['amplitude']),
                components=[float(c) for c in forcing['components']],
                wavenumber=int(forcing['wavenumber']),
                path=forcing['path'],
            ),
            output=OutputConfig(
                directory=str(output['directory']),
                write_snapshots=bool(output['write_snapshots']),
            ),
            monitors=MonitorConfig(
                stable_threshold=float(monitors['stable_threshold']),
                divergent_threshold=float(monitors['divergent_threshold']),
                dr_exponent=None if dr_exponent is None else float(dr_exponent),
            ),
            trace=trace_config,
            parallel=bool(settings['run']['parallel']),
            source=source,
        )

    @staticmethod
    def expand_plan(config: RunConfig) -> List[Dict[str, Any]]:
        """
        The runs a config asks for, coarse to fine.

        A config without a ladder is a single run in its output directory; a
        ladder becomes one run per resolution in subdirectories n016, n032, ...

        Returns:
            One dictionary per run with resolution, directory and grid
        """
        base = Path(config.output.directory)
        if not config.grid.ladder:
            return [{
                'resolution': config.resolution,
                'directory': str(base),
                'grid': config.grid.to_dict(),
            }]
        plan = []
        for resolution in config.grid.ladder:
            rung = config.at_resolution(resolution, str(base / f'n{resolution:03d}'))
            plan.append({
                'resolution': resolution,
                'directory': rung.output.directory,
                'grid': rung.grid.to_dict(),
            })
        return plan


def _optional_int(value: Any) -> Optional[int]:
    return None if value is None else int(value)
