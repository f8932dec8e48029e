#!/usr/bin/env python3
"""
Running time integrals of monitor samples.
"""

from __future__ import annotations
import math

from models.errors import InvalidInputError
from models.regularity_report import AccumulatorState, RegularityReport

WEIGHT_MODES = ('none', 'linear_t')


def weighted_accumulator_update(
    report: RegularityReport,
    name: str,
    t: float,
    value: float,
    weight_mode: str = 'none',
) -> RegularityReport:
    """
    Add one sample to the trapezoidal integral of w(t) * value.

    The first sample only records the starting point, so a single sample
    integrates to 0. The report is updated in place and returned.

    Args:
        report: Report owning the accumulator
        name: Accumulator key, e.g. 'int_t_h2_sq'
        t: Sample time, non-decreasing across calls for one name
        value: Integrand sample
        weight_mode: 'none' for w = 1, 'linear_t' for w = t

    Returns:
        The same report

    Raises:
        InvalidInputError: Unknown weight mode, non-finite sample or time regression
    """
    if weight_mode not in WEIGHT_MODES:
        raise InvalidInputError(
            f"weight_mode must be one of {WEIGHT_MODES}, got {weight_mode!r}"
        )
    if not (math.isfinite(t) and math.isfinite(value)):
        raise InvalidInputError(
            f"accumulator {name!r} received a non-finite sample t={t}, value={value}"
        )
    integrand = value * (t if weight_mode == 'linear_t' else 1.0)
    state = report.accumulators.setdefault(name, AccumulatorState())
    if state.last_t is not None:
        if t < state.last_t:
            raise InvalidInputError(
                f"accumulator {name!r}: time regressed from {state.last_t} to {t}"
            )
        state.total += 0.5 * (t - state.last_t) * (integrand + state.last_integrand)
    state.last_t = t
    state.last_integrand = integrand
    return report
