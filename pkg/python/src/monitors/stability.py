#!/usr/bin/env python3
"""
Measured counterparts of two a priori estimates on the torus.

* Perturbation growth: two solutions whose initial data differ by U(0)
  with ||U(0)||_2 = eps satisfy
  ||U(t)||_2 <= eps exp(C / nu0 * integral_0^t ||grad u||_2^2 ds).
  The constant C is estimated from one perturbation size and the envelope
  is then checked on others.
* Second-derivative bound: ||u||_{2,l}^p <= c (I(u) + delta^p) for
  l in (1, 2); the constant c is calibrated on one run and checked on
  every sample of another.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, List

import numpy as np
from scipy.integrate import cumulative_trapezoid

from fields.torus_calculus import gradient_norm, l2_norm, sobolev_norm
from models.errors import InvalidInputError
from models.stress_params import StressParams
from models.torus_field import TorusField
from monitors.functionals import functional_I
from solvers.initial_data import spectrum_field
from solvers.torus_solver import TorusSolver, TorusSolverState

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 2.0
# direction of the initial perturbation: smooth random data
PERTURBATION_ALPHA = 2.0


@dataclass
class PerturbationRecord:
    """
    Two runs advanced in lockstep from initial data eps apart.

    Attributes:
        eps: ||U(0)||_2
        times: Sample times
        difference_norms: ||U(t)||_2
        grad_sq: ||grad u(t)||_2^2 of the reference run
        nu0: Newtonian viscosity of the runs
    """
    eps: float
    times: np.ndarray
    difference_norms: np.ndarray
    grad_sq: np.ndarray
    nu0: float

    @property
    def dissipation_integral(self) -> np.ndarray:
        return cumulative_trapezoid(self.grad_sq, self.times, initial=0.0)


def perturbation_run(
    solver: TorusSolver,
    reference: TorusField,
    eps: float,
    steps: int,
    dt: float,
    seed: int = 1,
) -> PerturbationRecord:
    """
    Advance reference and reference + eps * direction side by side.

    The direction is a smooth random solenoidal field with unit L2 norm,
    truncated to the solver's cutoff.

    Raises:
        InvalidInputError: If eps <= 0 or steps < 1
    """
    if not eps > 0 or steps < 1:
        raise InvalidInputError(
            "a perturbation run needs eps > 0 and at least one step"
        )
    direction = spectrum_field(
        reference.grid, PERTURBATION_ALPHA, 1.0, seed, solver.cutoff
    )
    direction = direction.scaled(1.0 / l2_norm(direction))
    base = TorusSolverState(
        t=0.0,
        u=reference,
        params=solver.params,
        cutoff=solver.cutoff,
        forcing=solver.forcing,
    )
    perturbed = replace(base, u=reference + direction.scaled(eps))
    times = [0.0]
    diffs = [l2_norm(perturbed.u - base.u)]
    grads = [gradient_norm(base.u) ** 2]
    for _ in range(steps):
        base = solver.step(base, dt)
        perturbed = solver.step(perturbed, dt)
        times.append(base.t)
        diffs.append(l2_norm(perturbed.u - base.u))
        grads.append(gradient_norm(base.u) ** 2)
    return PerturbationRecord(
        eps=diffs[0],
        times=np.array(times),
        difference_norms=np.array(diffs),
        grad_sq=np.array(grads),
        nu0=solver.params.nu0,
    )


def gronwall_constant(record: PerturbationRecord) -> float:
    """
    Smallest C >= 0 for which the envelope holds on the record.

    Samples where the dissipation integral is still zero are skipped.
    """
    integral = record.dissipation_integral
    constant = 0.0
    for diff, accumulated in zip(record.difference_norms[1:], integral[1:]):
        if accumulated > 0 and diff > record.eps:
            growth = math.log(diff / record.eps)
            constant = max(constant, record.nu0 * growth / accumulated)
    return constant


def gronwall_envelope(record: PerturbationRecord, constant: float) -> np.ndarray:
    """eps exp(C / nu0 * integral_0^t ||grad u||^2) at the record's times."""
    if record.nu0 <= 0:
        raise InvalidInputError("the Gronwall envelope needs nu0 > 0")
    return record.eps * np.exp(constant / record.nu0 * record.dissipation_integral)


def gronwall_check(
    record: PerturbationRecord, constant: float, margin: float = DEFAULT_MARGIN
) -> bool:
    """True when ||U(t)|| stays below margin times the envelope at every sample."""
    envelope = gronwall_envelope(record, constant)
    ok = bool(np.all(record.difference_norms <= margin * envelope))
    if not ok:
        logger.warning(
            "Gronwall envelope exceeded for eps=%.1e (C=%.3g)", record.eps, constant
        )
    return ok


def w2l_ratio(u: TorusField, params: StressParams, ell: float) -> float:
    """||u||_{2,l}^p / (I(u) + delta^p); 0 for u = 0 when delta = 0."""
    if not 1.0 < ell < 2.0 + 1e-12:
        raise InvalidInputError(f"l must lie in (1, 2], got {ell}")
    numerator = sobolev_norm(u, order=2, exponent=ell) ** params.p
    denominator = functional_I(u, params) + params.delta ** params.p
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return numerator / denominator


def calibrate_w2l_constant(
    fields: Iterable[TorusField], params: StressParams, ell: float
) -> float:
    """Largest observed ratio over a calibration set."""
    ratios = [w2l_ratio(u, params, ell) for u in fields]
    if not ratios:
        raise InvalidInputError("calibration needs at least one field")
    return max(ratios)


@dataclass
class ShapeCheck:
    ell: float
    constant: float
    margin: float
    ratios: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r <= self.margin * self.constant for r in self.ratios)


def w2l_shape_check(
    fields: Iterable[TorusField],
    params: StressParams,
    ell: float,
    constant: float,
    margin: float = DEFAULT_MARGIN,
) -> ShapeCheck:
    """Evaluate the second-derivative bound on every field with a fixed constant."""
    check = ShapeCheck(
        ell=ell,
        constant=constant,
        margin=margin,
        ratios=[w2l_ratio(u, params, ell) for u in fields],
    )
    if not check.passed:
        logger.warning(
            "W^{2,%g} bound exceeded: max ratio %.3g > %.3g",
            ell,
            max(check.ratios),
            margin * constant,
        )
    return check
