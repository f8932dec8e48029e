#!/usr/bin/env python3
"""
RegularityReport data model: monitor time series of one run.
"""

from __future__ import annotations
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from models.errors import InvalidInputError

# Column order of report.csv. Documented in README.md; do not reorder.
BASE_COLUMNS: List[str] = [
    't',
    'l2_norm',
    'grad_l2_norm',
    'h2_norm',
    'du_lp_norm',
    'functional_I',
    'functional_I1',
    'functional_J',
    'functional_M',
    'ut_l2_norm',
    'stress_power',
    'forcing_power',
    'energy_residual',
    'int_grad_sq',
    'int_t_h2_sq',
    'int_du_lp_p',
    'int_t_I1',
    'int_l2_p',
    'int_h2_sq',
]

CHANNEL_EXTRA_COLUMNS: List[str] = [
    'alpha1_min',
    'dp1_l2',
    'dp2_l2',
    'd2plus_l2',
    'd22u1_l2',
    'necas_ratio',
    'recovery_residual',
    'tangential_bound_ok',
    'conv_l2',
    'conv_holder_bound',
]

# Columns whose absence is recorded as NaN (empty in CSV) rather than computed.
OPTIONAL_COLUMNS = {'functional_J', 'ut_l2_norm'} | set(CHANNEL_EXTRA_COLUMNS)


def columns_for(geometry: str) -> List[str]:
    if geometry == 'torus':
        return list(BASE_COLUMNS)
    if geometry == 'channel':
        return BASE_COLUMNS + CHANNEL_EXTRA_COLUMNS
    raise InvalidInputError(f"unknown geometry {geometry!r}")


@dataclass
class AccumulatorState:
    """Running trapezoid of a weighted integrand."""
    last_t: Optional[float] = None
    last_integrand: float = 0.0
    total: float = 0.0


@dataclass
class LadderEntry:
    """
    One rung of a resolution-refinement ladder.

    Attributes:
        resolution: Grid size N (torus) or N2 (channel) of the rung
        times: Monitor sample times
        l2_norms: ||u||_2 at each sample
        h2_norms: ||u||_{2,2} at each sample
    """
    resolution: int
    times: List[float]
    l2_norms: List[float]
    h2_norms: List[float]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format for JSON serialization."""
        return {
            'resolution': self.resolution,
            'times': list(self.times),
            'l2Norms': list(self.l2_norms),
            'h2Norms': list(self.h2_norms),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> LadderEntry:
        required = ('resolution', 'times', 'l2Norms', 'h2Norms')
        missing = [k for k in required if k not in data]
        if missing:
            raise InvalidInputError(f"ladder entry is missing {missing}")
        return cls(
            resolution=int(data['resolution']),
            times=[float(v) for v in data['times']],
            l2_norms=[float(v) for v in data['l2Norms']],
            h2_norms=[float(v) for v in data['h2Norms']],
        )

    @classmethod
    def from_report(cls, resolution: int, report: RegularityReport) -> LadderEntry:
        return cls(
            resolution=resolution,
            times=report.column('t').tolist(),
            l2_norms=report.column('l2_norm').tolist(),
            h2_norms=report.column('h2_norm').tolist(),
        )


class RegularityReport:
    """
    Append-only table of monitor samples plus running accumulators.

    Rows are keyed by the geometry's fixed column list; a missing value is
    stored as NaN. The refinement list carries ladder metadata used by the
    uniqueness-criterion check.
    """

    def __init__(self, geometry: str = 'torus') -> None:
        self.geometry = geometry
        self.columns = columns_for(geometry)
        self.rows: List[Dict[str, float]] = []
        self.accumulators: Dict[str, AccumulatorState] = {}
        self.refinement: List[LadderEntry] = []
        self.metadata: Dict[str, Any] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: Dict[str, float]) -> None:
        """
        Add one monitor sample.

        Raises:
            InvalidInputError: Unknown column, missing time, or time regression
        """
        unknown = sorted(set(row) - set(self.columns))
        if unknown:
            raise InvalidInputError(f"unknown report columns {unknown}")
        if 't' not in row:
            raise InvalidInputError("report rows need a time 't'")
        if self.rows and row['t'] < self.rows[-1]['t']:
            raise InvalidInputError(
                f"report time regressed from {self.rows[-1]['t']} to {row['t']}"
            )
        values = {name: float(row.get(name, math.nan)) for name in self.columns}
        self.rows.append(values)

    def has_column(self, name: str) -> bool:
        return name in self.columns

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise InvalidInputError(f"report has no column {name!r}")
        return np.array([r[name] for r in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column('t')

    def last(self) -> Optional[Dict[str, float]]:
        return self.rows[-1] if self.rows else None

    def accumulated(self, name: str) -> float:
        state = self.accumulators.get(name)
        return state.total if state is not None else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, geometry: Optional[str] = None
    ) -> RegularityReport:
        """
        Rebuild a report from a report.csv table.

        Raises:
            InvalidInputError: If the table has no time column
        """
        if 't' not in frame.columns:
            raise InvalidInputError("report table has no 't' column")
        if geometry is None:
            geometry = 'channel' if 'alpha1_min' in frame.columns else 'torus'
        report = cls(geometry)
        report.columns = [str(name) for name in frame.columns]
        for record in frame.to_dict(orient='records'):
            report.rows.append(
                {name: float(record.get(name, math.nan)) for name in report.columns}
            )
        return report
