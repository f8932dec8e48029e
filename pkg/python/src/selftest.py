#!/usr/bin/env python3
"""
Invariant suite behind `shearflow selftest`.

Each check is small enough to finish in seconds and returns a row with
its name, outcome and a one-line detail.
"""

from __future__ import annotations
import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from constitutive.inequalities import monotonicity_constants
from constitutive.stress_tensor import stress_directional_derivative
from fields import channel_calculus as cc
from fields.torus_calculus import gradient_norm, sym_grad, sym_grad_lp_norm
from models.channel_field import ChannelGrid
from models.run_config import ForcingSpec, InitialSpec, SolverConfig
from models.stress_params import StressParams, SymTensor2
from models.torus_field import TorusField, TorusGrid
from models.trajectory_bundle import BundleSpec
from models.velocity_history import VelocityHistory
from particles.tracer import forward_backward_error
from solvers.channel_solver import project
from solvers.forcing import torus_forcing
from solvers.initial_data import spectrum_field
from solvers.torus_solver import TorusSolver

logger = logging.getLogger(__name__)

CheckResult = Dict[str, object]


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    return {'name': name, 'passed': bool(passed), 'detail': detail}


def check_stress_inequalities(quick: bool) -> CheckResult:
    """Jacobian bounds and monotonicity on random tensors."""
    samples = 2_000 if quick else 100_000
    rng = np.random.default_rng(0)
    failures = 0
    worst_c0 = math.inf
    for p in (1.5, 1.75, 2.0):
        for delta in (0.0, 0.1, 1.0):
            params = StressParams(p=p, delta=delta, nu0=1.0, nu1=1.0)
            worst_c0 = min(worst_c0, monotonicity_constants(params, samples=samples).c0)
            for _ in range(200 if quick else 2_000):
                d = SymTensor2.from_matrix(rng.uniform(-5, 5, (2, 2)))
                c = SymTensor2.from_matrix(rng.uniform(-5, 5, (2, 2)))
                if d.frobenius_norm == 0.0:
                    continue
                _, ok = stress_directional_derivative(d, c, params)
                failures += not ok
    return _result(
        'stress inequalities',
        failures == 0 and worst_c0 > 0,
        f"{failures} Jacobian bound failure(s), "
        f"smallest monotonicity ratio {worst_c0:.4g}",
    )


def check_korn_identity(quick: bool) -> CheckResult:
    """||grad v|| = sqrt(2) ||Dv|| for solenoidal torus fields."""
    grid = TorusGrid(16 if quick else 32)
    worst = 0.0
    for seed in range(10 if quick else 100):
        v = spectrum_field(grid, 1.5, 1.0, seed)
        grad = gradient_norm(v)
        sym = sym_grad_lp_norm(sym_grad(v), grid, 2.0)
        worst = max(worst, abs(grad - math.sqrt(2.0) * sym) / grad)
    return _result('Korn identity', worst <= 1e-12, f"max relative gap {worst:.2e}")


def check_taylor_green_decay(quick: bool) -> CheckResult:
    """p = 2 Taylor-Green decays like exp(-2 (nu0 + nu1/2) t) in L2."""
    grid = TorusGrid(16)
    params = StressParams(p=2.0, delta=0.0, nu0=0.1, nu1=0.2)
    config = SolverConfig(dt=1e-2, T=0.2 if quick else 1.0)
    solver = TorusSolver(grid, params, config, torus_forcing(ForcingSpec(), grid))
    report = solver.run(InitialSpec(kind='taylor-green')).report
    l2 = report.column('l2_norm')
    expected = l2[0] * math.exp(-2.0 * params.newtonian_viscosity * config.T)
    error = abs(l2[-1] - expected) / expected
    energy = 0.5 * l2[0] ** 2
    residual = report.column('energy_residual')[-1] / energy
    return _result(
        'Taylor-Green decay',
        error <= 1e-6 and residual <= 1e-4,
        f"relative L2 error {error:.2e}, relative energy residual {residual:.2e}",
    )


def check_channel_projection(quick: bool) -> CheckResult:
    """Projected channel fields are discretely divergence-free with no-slip walls."""
    grid = ChannelGrid(16, 16 if quick else 32)
    x1, x2 = grid.node_coordinates()
    bump = 1.0 - x2 ** 2
    u1 = bump * (np.cos(math.pi * x1) + x2 * np.sin(2.0 * math.pi * x1))
    u2 = bump * (np.sin(math.pi * x1) + x2 ** 2)
    velocity = np.stack([u1, u2])
    projected, _ = project(velocity, grid)
    divergence = float(np.max(np.abs(cc.staggered_divergence(projected, grid))))
    walls = float(np.max(np.abs(projected[:, :, [0, -1]])))
    scale = float(np.max(np.abs(velocity)))
    return _result(
        'channel projection',
        divergence <= 1e-10 * scale and walls == 0.0,
        f"max divergence {divergence:.2e}, max wall velocity {walls:.1e}",
    )


def check_forward_backward(quick: bool) -> CheckResult:
    """Tracing a frozen shear forward and back returns to the start."""
    grid = TorusGrid(16)
    _, x2 = grid.coordinates()
    values = np.stack([np.sin(x2), np.zeros_like(x2)])
    shear = TorusField.from_physical(grid, values, solenoidal=True)
    history = VelocityHistory.frozen(shear, 1.0)
    spec = BundleSpec(np.array([[0.0, math.pi / 2], [1.0, 2.0], [4.0, 0.5]]))
    error = forward_backward_error(history, spec, 1e-2 if quick else 1e-3).max_error
    return _result(
        'forward-backward tracing', error <= 1e-10, f"max return error {error:.2e}"
    )


CHECKS: List[Tuple[str, Callable[[bool], CheckResult]]] = [
    ('stress', check_stress_inequalities),
    ('korn', check_korn_identity),
    ('taylor-green', check_taylor_green_decay),
    ('channel', check_channel_projection),
    ('tracing', check_forward_backward),
]


def run_selftest(quick: bool = False) -> List[CheckResult]:
    """
    Run every check; an exception inside a check counts as a failure.

    Args:
        quick: Use smaller samples and grids

    Returns:
        One result row per check
    """
    results = []
    for name, check in CHECKS:
        try:
            results.append(check(quick))
        except Exception as e:
            logger.exception("Self-test check %s raised", name)
            results.append(_result(name, False, f"raised {type(e).__name__}: {e}"))
    return results
