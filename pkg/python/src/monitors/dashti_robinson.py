#!/usr/bin/env python3
"""
Uniqueness-criterion check for particle trajectories.

In two dimensions the trajectory equation has a unique solution when
u lies in L^p(0,T;L^2) for some p > 1 and sqrt(t) u in L^2(0,T;W^{2,2}).
Finiteness cannot be observed on one discrete run, so the check asks
whether both integrals settle as the grid is refined.
"""

from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from models.errors import InvalidInputError
from models.regularity_report import LadderEntry, RegularityReport
from utils.math_utils import MathUtils

logger = logging.getLogger(__name__)

SATISFIED = 'satisfied'
VIOLATED = 'violated'
INCONCLUSIVE = 'inconclusive'

REQUIRED_COLUMNS = ('t', 'l2_norm', 'h2_norm', 'int_l2_p', 'int_t_h2_sq')

DEFAULT_STABLE_THRESHOLD = 0.05
DEFAULT_DIVERGENT_THRESHOLD = 0.5


@dataclass(frozen=True)
class DRThresholds:
    """
    Attributes:
        stable: Largest relative change at the last doubling counted as settled
        divergent: Smallest relative growth at the last doubling counted as blow-up
    """
    stable: float = DEFAULT_STABLE_THRESHOLD
    divergent: float = DEFAULT_DIVERGENT_THRESHOLD


@dataclass
class DRVerdict:
    """
    Outcome of the uniqueness-criterion check.

    Attributes:
        verdict: 'satisfied', 'violated' or 'inconclusive'
        p_exponent: Exponent of the L^p-in-time condition
        int_l2_p: Integral of ||u||_2^p on the finest run
        int_t_h2_sq: Integral of t ||u||_{2,2}^2 on the finest run
        int_h2_sq: Unweighted integral of ||u||_{2,2}^2, reported for contrast
        resolutions: Ladder resolutions, coarse to fine
        ladder_l2_p: Per-rung integral of ||u||_2^p
        ladder_t_h2_sq: Per-rung integral of t ||u||_{2,2}^2
        changes: Relative changes of both integrals at the last doubling
        reason: One-line explanation
    """
    verdict: str
    p_exponent: float
    int_l2_p: float
    int_t_h2_sq: float
    int_h2_sq: float = math.nan
    resolutions: List[int] = field(default_factory=list)
    ladder_l2_p: List[float] = field(default_factory=list)
    ladder_t_h2_sq: List[float] = field(default_factory=list)
    changes: Dict[str, float] = field(default_factory=dict)
    reason: str = ''

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format for JSON serialization."""
        return {
            'verdict': self.verdict,
            'pExponent': self.p_exponent,
            'intL2P': self.int_l2_p,
            'intTH2Sq': self.int_t_h2_sq,
            'intH2Sq': self.int_h2_sq,
            'resolutions': list(self.resolutions),
            'ladderL2P': list(self.ladder_l2_p),
            'ladderTH2Sq': list(self.ladder_t_h2_sq),
            'changes': dict(self.changes),
            'reason': self.reason,
        }


def _rung_integrals(entry: LadderEntry, p_exponent: float) -> Dict[str, float]:
    l2_p = [v ** p_exponent for v in entry.l2_norms]
    h2_sq = [v ** 2 for v in entry.h2_norms]
    return {
        'int_l2_p': MathUtils.trapezoid_integral(l2_p, entry.times),
        'int_t_h2_sq': MathUtils.trapezoid_integral(h2_sq, entry.times, weighted=True),
    }


def dashti_robinson_check(
    report: RegularityReport,
    p_exponent: float,
    thresholds: Optional[DRThresholds] = None,
) -> DRVerdict:
    """
    Judge the two integrability conditions of the uniqueness criterion.

    Rules, applied to the last two rungs of the report's refinement ladder:
    satisfied when both integrals are finite and change by at most
    thresholds.stable; violated when either is non-finite or grows by at
    least thresholds.divergent; inconclusive otherwise. Without a ladder the
    verdict is inconclusive unless both integrals vanish identically.

    Args:
        report: Report of the finest run, with ladder metadata in report.refinement
        p_exponent: Exponent p > 1 of the L^p(0,T;L^2) condition
        thresholds: Stability and divergence thresholds

    Returns:
        DRVerdict with the summary scalars

    Raises:
        InvalidInputError: Missing report columns or p_exponent <= 1
    """
    thresholds = thresholds or DRThresholds()
    missing = [c for c in REQUIRED_COLUMNS if not report.has_column(c)]
    if missing:
        raise InvalidInputError(
            f"report lacks the columns {missing} needed by the uniqueness check"
        )
    if not p_exponent > 1.0:
        raise InvalidInputError(f"the L^p condition needs p > 1, got {p_exponent}")

    last = report.last() or {}
    int_l2_p = float(last.get('int_l2_p', 0.0))
    int_t_h2_sq = float(last.get('int_t_h2_sq', 0.0))
    int_h2_sq = math.nan
    if report.has_column('int_h2_sq'):
        int_h2_sq = float(last.get('int_h2_sq', math.nan))
    verdict = DRVerdict(
        verdict=INCONCLUSIVE,
        p_exponent=p_exponent,
        int_l2_p=int_l2_p,
        int_t_h2_sq=int_t_h2_sq,
        int_h2_sq=int_h2_sq,
    )

    if not (math.isfinite(int_l2_p) and math.isfinite(int_t_h2_sq)):
        verdict.verdict = VIOLATED
        verdict.reason = 'an integral is not finite on the finest run'
        return _logged(verdict)

    rungs = sorted(report.refinement, key=lambda e: e.resolution)
    if len(rungs) < 2:
        if int_l2_p == 0.0 and int_t_h2_sq == 0.0:
            verdict.verdict = SATISFIED
            verdict.reason = 'both integrals vanish'
        else:
            verdict.reason = (
                'no refinement ladder; '
                'finiteness cannot be judged from one resolution'
            )
        return _logged(verdict)

    integrals = [_rung_integrals(e, p_exponent) for e in rungs]
    verdict.resolutions = [e.resolution for e in rungs]
    verdict.ladder_l2_p = [i['int_l2_p'] for i in integrals]
    verdict.ladder_t_h2_sq = [i['int_t_h2_sq'] for i in integrals]
    if not all(math.isfinite(v) for v in verdict.ladder_l2_p + verdict.ladder_t_h2_sq):
        verdict.verdict = VIOLATED
        verdict.reason = 'an integral is not finite on some rung'
        return _logged(verdict)

    previous, current = integrals[-2], integrals[-1]
    changes = {
        name: MathUtils.relative_change(previous[name], current[name])
        for name in current
    }
    growth = {name: MathUtils.growth(previous[name], current[name]) for name in current}
    verdict.changes = changes
    if all(c <= thresholds.stable for c in changes.values()):
        verdict.verdict = SATISFIED
        verdict.reason = (f'both integrals change by at most {thresholds.stable:.0%} '
                          f'from N={rungs[-2].resolution} to N={rungs[-1].resolution}')
    elif any(g >= thresholds.divergent for g in growth.values()):
        verdict.verdict = VIOLATED
        worst = max(growth, key=growth.get)
        verdict.reason = f'{worst} grows by {growth[worst]:.0%} at the last doubling'
    else:
        verdict.reason = 'integrals neither settled nor diverging at the last doubling'
    return _logged(verdict)


def _logged(verdict: DRVerdict) -> DRVerdict:
    if verdict.verdict == INCONCLUSIVE:
        logger.warning("Uniqueness check inconclusive: %s", verdict.reason)
    else:
        logger.info("Uniqueness check %s: %s", verdict.verdict, verdict.reason)
    return verdict
