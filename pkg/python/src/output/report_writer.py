#!/usr/bin/env python3
"""
CSV and JSON writers for run artifacts.

Floats are written with 17 significant digits and '\n' line endings, so
equal reports produce byte-identical files on every platform.
"""

from __future__ import annotations
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from models.errors import InvalidInputError
from models.regularity_report import LadderEntry, RegularityReport
from models.trajectory_bundle import TrajectoryBundle
from particles.diagnostics import SeparationDiagnostics

logger = logging.getLogger(__name__)

REPORT_FILE = 'report.csv'
LADDER_FILE = 'ladder.json'
TRAJECTORY_FILE = 'trajectories.csv'
DIAGNOSTICS_FILE = 'diagnostics.csv'
FLOAT_FORMAT = '%.17g'


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path,
        index=False,
        float_format=FLOAT_FORMAT,
        na_rep='',
        lineterminator='\n',
    )
    return path


def write_json(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Pretty-printed JSON with sorted keys and a trailing newline."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, 'w', encoding='utf-8', newline='\n') as file:
        json.dump(data, file, indent=2, sort_keys=True, default=str)
        file.write('\n')
    return target


class ReportWriter:
    """
    Writes and reads the tabular outputs of a run directory.
    """

    @staticmethod
    def write_report(
        report: RegularityReport, directory: Union[str, Path]
    ) -> List[Path]:
        """
        Write report.csv, plus ladder.json when the report carries ladder metadata.

        Returns:
            Paths of the written files
        """
        target = Path(directory)
        written = [_write_frame(report.to_frame(), target / REPORT_FILE)]
        if report.refinement:
            ladder = {
                'geometry': report.geometry,
                'rungs': [entry.to_dict() for entry in report.refinement],
            }
            written.append(write_json(ladder, target / LADDER_FILE))
        logger.info("Wrote %d report row(s) to %s", len(report), written[0])
        return written

    @staticmethod
    def read_report(location: Union[str, Path]) -> RegularityReport:
        """
        Load a report from a run directory or a report.csv path.

        A ladder.json next to the CSV is attached as refinement metadata.

        Raises:
            FileNotFoundError: If no report.csv exists
            InvalidInputError: If the table has no time column
        """
        path = Path(location)
        if path.is_dir():
            path = path / REPORT_FILE
        if not path.exists():
            raise FileNotFoundError(f"Report not found: {path}")
        report = RegularityReport.from_frame(pd.read_csv(path))
        sidecar = path.parent / LADDER_FILE
        if sidecar.exists():
            with open(sidecar, 'r', encoding='utf-8') as file:
                data = json.load(file)
            rungs = data.get('rungs', [])
            report.refinement = [LadderEntry.from_dict(rung) for rung in rungs]
        return report

    @staticmethod
    def write_trajectories(
        bundle: TrajectoryBundle, directory: Union[str, Path]
    ) -> Path:
        """trajectories.csv: one row per (time, particle), with the wall-clamp flag."""
        frame = pd.DataFrame(bundle.to_records())
        frame['cluster'] = [int(bundle.cluster_ids[j]) for j in frame['particle']]
        clamped = bundle.clamped
        frame['clamped'] = clamped.reshape(-1).astype(int) if clamped is not None else 0
        return _write_frame(frame, Path(directory) / TRAJECTORY_FILE)

    @staticmethod
    def write_diagnostics(
        diagnostics: SeparationDiagnostics, directory: Union[str, Path]
    ) -> Path:
        """diagnostics.csv: separation against the Osgood and Lipschitz envelopes."""
        columns = ['t', 'max_separation', 'envelope', 'lipschitz_envelope']
        frame = pd.DataFrame(diagnostics.to_records(), columns=columns)
        return _write_frame(frame, Path(directory) / DIAGNOSTICS_FILE)

    @staticmethod
    def read_table(path: Union[str, Path]) -> pd.DataFrame:
        target = Path(path)
        if not target.exists():
            raise FileNotFoundError(f"Table not found: {target}")
        frame = pd.read_csv(target)
        if frame.empty and len(frame.columns) == 0:
            raise InvalidInputError(f"{target} is empty")
        return frame
