#!/usr/bin/env python3
"""
Energy balance of the momentum equation.

For a solution, 1/2 ||u(s)||^2 + nu0 int ||grad u||^2 + nu1 int <S(Du), Du>
- 1/2 ||u(s0)||^2 - int (f, u) vanishes; the residual measures how far a
discrete run is from that identity.
"""

from __future__ import annotations
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from models.errors import InvalidInputError


def energy_balance_residual(
    l2_start: float,
    l2_end: float,
    times: Sequence[float],
    grad_sq: Sequence[float],
    stress_power: Sequence[float],
    forcing_power: Sequence[float],
    nu0: float,
    nu1: float,
) -> float:
    """
    Residual of the energy equality between the first and last sample.

    Args:
        l2_start: ||u(s0)||_2
        l2_end: ||u(s)||_2
        times: Sample times from s0 to s
        grad_sq: ||grad u||_2^2 at each sample
        stress_power: <S(Du), Du> at each sample
        forcing_power: (f, u) at each sample
        nu0: Newtonian viscosity
        nu1: Non-Newtonian viscosity

    Returns:
        Absolute residual, integrals by the trapezoidal rule

    Raises:
        InvalidInputError: If the sample sequences differ in length
    """
    t = np.asarray(times, dtype=float)
    series = [
        np.asarray(s, dtype=float) for s in (grad_sq, stress_power, forcing_power)
    ]
    if any(len(s) != len(t) for s in series):
        raise InvalidInputError(
            "energy balance samples must all have one value per time"
        )
    if len(t) < 2:
        return abs(0.5 * l2_end ** 2 - 0.5 * l2_start ** 2)
    dissipation = trapezoid(nu0 * series[0] + nu1 * series[1], t)
    work = trapezoid(series[2], t)
    return abs(0.5 * l2_end ** 2 + dissipation - 0.5 * l2_start ** 2 - work)
