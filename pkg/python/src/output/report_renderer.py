#!/usr/bin/env python3
"""
Summary tables and gnuplot-ready data files for a finished report.
"""

from __future__ import annotations
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from models.regularity_report import RegularityReport
from monitors.dashti_robinson import DRVerdict

logger = logging.getLogger(__name__)

PLOT_GROUPS: Dict[str, List[str]] = {
    'norms': ['t', 'l2_norm', 'grad_l2_norm', 'h2_norm', 'du_lp_norm'],
    'functionals': [
        't', 'functional_I', 'functional_I1', 'functional_J', 'functional_M'
    ],
    'energy': ['t', 'stress_power', 'forcing_power', 'energy_residual'],
    'integrals': [
        't',
        'int_grad_sq',
        'int_t_h2_sq',
        'int_h2_sq',
        'int_l2_p',
        'int_du_lp_p',
        'int_t_I1',
    ],
    'channel': [
        't',
        'alpha1_min',
        'dp1_l2',
        'dp2_l2',
        'd2plus_l2',
        'd22u1_l2',
        'necas_ratio',
        'recovery_residual',
        'conv_l2',
        'conv_holder_bound',
    ],
}


def _write_dat(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as file:
        file.write('# ' + ' '.join(frame.columns) + '\n')
        frame.to_csv(
            file,
            sep=' ',
            header=False,
            index=False,
            float_format='%.10e',
            na_rep='nan',
            lineterminator='\n',
        )
    return path


class ReportRenderer:
    """
    Turns a RegularityReport into console tables and plot data.
    """

    @staticmethod
    def summary_frame(report: RegularityReport) -> pd.DataFrame:
        """
        Initial, minimum, maximum and final value of every populated column.

        Returns:
            One row per column, indexed by column name
        """
        frame = report.to_frame()
        rows = []
        for name in frame.columns:
            values = frame[name].to_numpy(dtype=float)
            finite = values[np.isfinite(values)]
            if name == 't' or finite.size == 0:
                continue
            rows.append(
                {
                    'column': name,
                    'initial': values[0],
                    'min': float(finite.min()),
                    'max': float(finite.max()),
                    'final': values[-1],
                }
            )
        columns = ['column', 'initial', 'min', 'max', 'final']
        return pd.DataFrame(rows, columns=columns).set_index('column')

    @staticmethod
    def ladder_frame(verdict: DRVerdict) -> pd.DataFrame:
        return pd.DataFrame({'resolution': verdict.resolutions,
                             'int_l2_p': verdict.ladder_l2_p,
                             'int_t_h2_sq': verdict.ladder_t_h2_sq})

    @classmethod
    def write_plot_data(
        cls,
        report: RegularityReport,
        directory: Union[str, Path],
        verdict: Optional[DRVerdict] = None,
    ) -> List[Path]:
        """
        Write one whitespace-separated .dat file per column group.

        Groups with no populated column besides t are skipped; a verdict with
        ladder data adds ladder.dat.

        Returns:
            Paths of the written files
        """
        target = Path(directory)
        frame = report.to_frame()
        written = []
        for name, columns in PLOT_GROUPS.items():
            present = [c for c in columns if c in frame.columns]
            if len(present) < 2 or frame[present[1:]].isna().all().all():
                continue
            written.append(_write_dat(frame[present], target / f'{name}.dat'))
        if verdict is not None and verdict.resolutions:
            written.append(_write_dat(cls.ladder_frame(verdict), target / 'ladder.dat'))
        logger.info("Wrote %d plot data file(s) to %s", len(written), target)
        return written
