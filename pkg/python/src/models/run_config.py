#!/usr/bin/env python3
"""
RunConfig data model and its sections.

The loader fills defaults and the validator checks ranges; these classes
only carry values and convert to and from plain dictionaries.
"""

from __future__ import annotations
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from models.errors import InvalidInputError
from models.stress_params import StressParams

SCHEMES = ('imex-cn-ab2', 'imex-euler', 'rk3-fully-explicit')
CHANNEL_SCHEMES = ('imex-cn-ab2', 'imex-euler')
DIFFUSION_MODES = ('integrating-factor', 'crank-nicolson')
TORUS_INITIAL_KINDS = (
    'zero', 'taylor-green', 'shear', 'spectrum', 'snapshot', 'vortex'
)
CHANNEL_INITIAL_KINDS = ('zero', 'poiseuille', 'shear-mode', 'cellular', 'snapshot')
TORUS_FORCING_KINDS = ('zero', 'kolmogorov', 'taylor-green', 'file')
CHANNEL_FORCING_KINDS = ('zero', 'uniform', 'file')

# Rough spectrum data is drawn on a fixed lattice of this many modes per axis;
# truncations keep |k_i| <= SPECTRUM_MAX_CUTOFF.
SPECTRUM_MASTER_MODES = 256
SPECTRUM_MAX_CUTOFF = SPECTRUM_MASTER_MODES // 2 - 1


@dataclass(frozen=True)
class GridConfig:
    """Resolution: n on the torus, n1 x n2 in the channel, plus an optional ladder."""
    n: Optional[int] = None
    n1: Optional[int] = None
    n2: Optional[int] = None
    cutoff: Optional[int] = None
    ladder: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'n1': self.n1,
            'n2': self.n2,
            'cutoff': self.cutoff,
            'ladder': list(self.ladder),
        }

    def channel_shape(self) -> Tuple[int, int]:
        if self.n1 is None or self.n2 is None:
            raise InvalidInputError("a channel grid needs n1 and n2")
        return self.n1, self.n2


@dataclass(frozen=True)
class SolverConfig:
    """
    Time stepping controls.

    Attributes:
        dt: Time step
        T: Final time
        scheme: imex-cn-ab2, imex-euler or rk3-fully-explicit
        diffusion: Implicit treatment of the Laplacian, integrating-factor or
            crank-nicolson
        stabilization: Weight of the implicit linear stabilization of the stress
        cfl_limit: Largest admissible max|u| dt / h
        snapshot_stride: Steps between snapshots
        monitor_stride: Steps between monitor samples
        seed: Seed for random initial data
    """
    dt: float
    T: float
    scheme: str = 'imex-cn-ab2'
    diffusion: str = 'integrating-factor'
    stabilization: float = 1.0
    cfl_limit: float = 1.0
    snapshot_stride: int = 100
    monitor_stride: int = 1
    seed: int = 0

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dt': self.dt,
            'T': self.T,
            'scheme': self.scheme,
            'diffusion': self.diffusion,
            'stabilization': self.stabilization,
            'cflLimit': self.cfl_limit,
            'snapshotStride': self.snapshot_stride,
            'monitorStride': self.monitor_stride,
            'seed': self.seed,
        }


@dataclass(frozen=True)
class InitialSpec:
    """Initial data description: analytic kind, spectrum law or snapshot file."""
    kind: str = 'zero'
    amplitude: float = 1.0
    alpha: float = 1.1
    path: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'amplitude': self.amplitude,
            'alpha': self.alpha,
            'path': self.path,
        }


@dataclass(frozen=True)
class ForcingSpec:
    """Body force description; time-independent except for file series."""
    kind: str = 'zero'
    amplitude: float = 1.0
    components: List[float] = field(default_factory=lambda: [1.0, 0.0])
    wavenumber: int = 1
    path: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'amplitude': self.amplitude,
            'components': list(self.components),
            'wavenumber': self.wavenumber,
            'path': self.path,
        }


@dataclass(frozen=True)
class OutputConfig:
    directory: str = 'shearflow_out'
    write_snapshots: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {'directory': self.directory, 'writeSnapshots': self.write_snapshots}


@dataclass(frozen=True)
class MonitorConfig:
    """Thresholds of the refinement-stability heuristic."""
    stable_threshold: float = 0.05
    divergent_threshold: float = 0.5
    dr_exponent: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'stableThreshold': self.stable_threshold,
            'divergentThreshold': self.divergent_threshold,
            'drExponent': self.dr_exponent,
        }


@dataclass(frozen=True)
class TraceConfig:
    """Optional particle tracing after a run."""
    points: List[List[float]] = field(default_factory=list)
    eps: float = 1e-4
    dt: float = 1e-2
    perturbations: int = 4
    T: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'points': [list(p) for p in self.points],
            'eps': self.eps,
            'dt': self.dt,
            'perturbations': self.perturbations,
            'T': self.T,
        }


@dataclass(frozen=True)
class RunConfig:
    """
    Fully validated run description.

    Attributes:
        geometry: 'torus' or 'channel'
        params: Constitutive constants
        grid: Resolution and refinement ladder
        solver: Time stepping controls
        initial: Initial data description
        forcing: Body force description
        output: Output directory settings
        monitors: Uniqueness-check thresholds
        trace: Particle tracing request, if any
        parallel: Run ladder rungs in worker processes
        source: Path of the TOML file the config came from
    """
    geometry: str
    params: StressParams
    grid: GridConfig
    solver: SolverConfig
    initial: InitialSpec = field(default_factory=InitialSpec)
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    output: OutputConfig = field(default_factory=OutputConfig)
    monitors: MonitorConfig = field(default_factory=MonitorConfig)
    trace: Optional[TraceConfig] = None
    parallel: bool = False
    source: Optional[str] = None

    @property
    def resolution(self) -> int:
        """The refined dimension: n on the torus, n2 in the channel."""
        value = self.grid.n if self.geometry == 'torus' else self.grid.n2
        if value is None:
            raise InvalidInputError(f"the {self.geometry} grid has no resolution")
        return int(value)

    @property
    def dr_exponent(self) -> float:
        exponent = self.monitors.dr_exponent
        return exponent if exponent is not None else self.params.p

    def at_resolution(self, resolution: int, directory: str) -> RunConfig:
        """Copy for one ladder rung; the channel refines n1 and n2 together."""
        if self.geometry == 'torus':
            grid = replace(self.grid, n=resolution, cutoff=None, ladder=[])
        else:
            grid = replace(self.grid, n1=resolution, n2=resolution, ladder=[])
        output = replace(self.output, directory=directory)
        return replace(self, grid=grid, output=output)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format for JSON serialization."""
        return {
            'geometry': self.geometry,
            'params': self.params.to_dict(),
            'grid': self.grid.to_dict(),
            'solver': self.solver.to_dict(),
            'initial': self.initial.to_dict(),
            'forcing': self.forcing.to_dict(),
            'output': self.output.to_dict(),
            'monitors': self.monitors.to_dict(),
            'trace': self.trace.to_dict() if self.trace is not None else None,
            'parallel': self.parallel,
        }
