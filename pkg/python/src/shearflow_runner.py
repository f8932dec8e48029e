#!/usr/bin/env python3
"""
Run orchestration: plan expansion, solver runs, the refinement ladder,
optional particle tracing and the artifacts each of them leaves behind.
"""

from __future__ import annotations
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from data.config_loader import ConfigLoader
from fields.snapshot_io import snapshot_name, write_snapshot
from models.channel_field import ChannelField, ChannelGrid
from models.errors import ShearflowError
from models.regularity_report import LadderEntry, RegularityReport
from models.run_config import RunConfig
from models.torus_field import TorusField, TorusGrid
from models.trajectory_bundle import BundleSpec
from models.velocity_history import VelocityHistory
from monitors.dashti_robinson import DRThresholds, DRVerdict, dashti_robinson_check
from output.manifest import write_manifest
from output.report_writer import ReportWriter
from particles.diagnostics import separation_diagnostics
from particles.tracer import forward_backward_error, trace
from solvers.channel_solver import ChannelSolver
from solvers.forcing import channel_forcing, torus_forcing
from solvers.torus_solver import TorusSolver

logger = logging.getLogger(__name__)

SNAPSHOT_DIR = 'snapshots'
STATUS_OK = 'ok'
STATUS_FAILED = 'failed'


@dataclass
class RunOutcome:
    """
    What one run (or a whole ladder) produced.

    Attributes:
        status: 'ok' or 'failed'
        directory: Run directory
        report: Monitor report; partial when the run failed
        outputs: Files written, for the manifest checksums
        verdict: Uniqueness-criterion verdict
        trace_summary: Separation and forward-backward results, if traced
        error: Message of the error that stopped the run
    """
    status: str
    directory: Path
    report: RegularityReport
    outputs: List[Path] = field(default_factory=list)
    verdict: Optional[DRVerdict] = None
    trace_summary: Optional[Dict[str, Any]] = None
    error: Optional[str] = None


class RunFailedError(ShearflowError):
    """A run stopped early; its partial artifacts are on disk."""

    def __init__(self, message: str, outcome: Optional[RunOutcome] = None) -> None:
        super().__init__(message)
        self.outcome = outcome


def _solver_for(config: RunConfig) -> Union[TorusSolver, ChannelSolver]:
    if config.geometry == 'torus':
        grid = TorusGrid(config.resolution)
        return TorusSolver(
            grid,
            config.params,
            config.solver,
            torus_forcing(config.forcing, grid),
            cutoff=config.grid.cutoff,
        )
    channel = ChannelGrid(*config.grid.channel_shape())
    forcing = channel_forcing(config.forcing, channel)
    return ChannelSolver(channel, config.params, config.solver, forcing)


def _verdict(report: RegularityReport, config: RunConfig) -> DRVerdict:
    thresholds = DRThresholds(
        stable=config.monitors.stable_threshold,
        divergent=config.monitors.divergent_threshold,
    )
    return dashti_robinson_check(report, config.dr_exponent, thresholds)


def trace_snapshots(
    config: RunConfig, snapshots: Sequence[Tuple[float, Any]], directory: Path
) -> Tuple[List[Path], Optional[Dict[str, Any]]]:
    """
    Trace the configured particle bundle through a run's snapshots.

    Without trace.T the bundle is traced over the whole run and back, which
    also yields the forward-backward error.

    Returns:
        Written files and the trace summary (None when there is nothing to trace)
    """
    request = config.trace
    if request is None or not request.points:
        return [], None
    if len(snapshots) < 2:
        logger.warning("Skipping particle tracing: the run produced a single snapshot")
        return [], None
    history = VelocityHistory([t for t, _ in snapshots], [f for _, f in snapshots])
    spec = BundleSpec(
        np.array(request.points, dtype=float),
        eps=request.eps,
        perturbations=request.perturbations,
    )
    dt_ode = min(request.dt, history.min_spacing())
    if dt_ode < request.dt:
        logger.info(
            "Reduced the tracing step to the shortest snapshot interval %.6g", dt_ode
        )
    summary: Dict[str, Any] = {
        'particles': int(len(spec.initial_positions())),
        'dtOde': dt_ode,
    }
    if request.T is None:
        round_trip = forward_backward_error(history, spec, dt_ode)
        bundle = round_trip.forward
        summary['forwardBackwardError'] = round_trip.max_error
    else:
        bundle = trace(history, spec, dt_ode, t_end=request.T)
    outputs = [ReportWriter.write_trajectories(bundle, directory)]
    if bundle.particle_count >= 2:
        diagnostics = separation_diagnostics(bundle)
        outputs.append(ReportWriter.write_diagnostics(diagnostics, directory))
        summary['separation'] = diagnostics.summary()
    clamped = bundle.clamped
    summary['clampedSamples'] = int(np.sum(clamped)) if clamped is not None else 0
    return outputs, summary


def run_single(config: RunConfig) -> RunOutcome:
    """
    One solver run with its report, snapshots, optional tracing and manifest.

    Raises:
        RunFailedError: If the solver failed; report.csv and manifest.json
            describe the partial run
    """
    directory = Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    outputs: List[Path] = []

    def on_snapshot(
        step: int, t: float, snapshot: Union[TorusField, ChannelField]
    ) -> None:
        if config.output.write_snapshots:
            path = directory / SNAPSHOT_DIR / snapshot_name(step)
            outputs.append(write_snapshot(path, snapshot, t))

    partial: Dict[str, RegularityReport] = {}

    def on_failure(report: RegularityReport) -> None:
        partial['report'] = report

    started = time.perf_counter()
    solver = _solver_for(config)
    try:
        run = solver.run(
            config.initial,
            config.dr_exponent,
            on_snapshot=on_snapshot,
            on_failure=on_failure,
        )
    except ShearflowError as e:
        report = partial.get('report', RegularityReport(config.geometry))
        outputs.extend(ReportWriter.write_report(report, directory))
        outcome = RunOutcome(STATUS_FAILED, directory, report, outputs, error=str(e))
        write_manifest(
            directory,
            config,
            outputs,
            STATUS_FAILED,
            {'error': str(e), 'metadata': report.metadata},
        )
        raise RunFailedError(f"run in {directory} failed: {e}", outcome) from e

    report = run.report
    outputs.extend(ReportWriter.write_report(report, directory))
    trace_outputs, trace_summary = trace_snapshots(config, run.snapshots, directory)
    outputs.extend(trace_outputs)
    verdict = _verdict(report, config)
    write_manifest(
        directory,
        config,
        outputs,
        STATUS_OK,
        {
            'metadata': report.metadata,
            'verdict': verdict.to_dict(),
            'trace': trace_summary,
        },
    )
    logger.info(
        "Run in %s finished in %.2f s", directory, time.perf_counter() - started
    )
    return RunOutcome(STATUS_OK, directory, report, outputs, verdict, trace_summary)


class ShearflowRunner:
    """
    Executes the plan of a validated config.

    Args:
        config: Validated run configuration
    """

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.plan = ConfigLoader.expand_plan(config)

    def orchestrate(self) -> RunOutcome:
        """
        Run everything the config asks for.

        Returns:
            The outcome of the single run, or the combined ladder outcome

        Raises:
            RunFailedError: A run failed; partial artifacts are preserved
        """
        if not self.config.grid.ladder:
            return run_single(self.config)
        return self._run_ladder()

    def _rung_configs(self) -> List[RunConfig]:
        rungs = []
        finest = len(self.plan) - 1
        for i, entry in enumerate(self.plan):
            rung = self.config.at_resolution(entry['resolution'], entry['directory'])
            # only the finest rung is traced
            rungs.append(rung if i == finest else replace(rung, trace=None))
        return rungs

    def _run_ladder(self) -> RunOutcome:
        config = self.config
        directory = Path(config.output.directory)
        directory.mkdir(parents=True, exist_ok=True)
        rungs = self._rung_configs()
        logger.info(
            "Refinement ladder %s (%s)",
            config.grid.ladder,
            'parallel' if config.parallel else 'sequential',
        )
        outcomes: List[RunOutcome] = []
        try:
            if config.parallel:
                workers = min(len(rungs), os.cpu_count() or 1)
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    outcomes = list(pool.map(run_single, rungs))
            else:
                for rung in rungs:
                    logger.info("Ladder rung %d", rung.resolution)
                    outcomes.append(run_single(rung))
        except ShearflowError as e:
            failed = getattr(e, 'outcome', None)
            outputs = [p for o in outcomes for p in o.outputs]
            if failed:
                outputs.extend(failed.outputs)
            report = failed.report if failed else RegularityReport(config.geometry)
            summary = RunOutcome(
                STATUS_FAILED, directory, report, outputs, error=str(e)
            )
            write_manifest(
                directory,
                config,
                outputs,
                STATUS_FAILED,
                {'plan': self.plan, 'error': str(e)},
            )
            raise RunFailedError(str(e), summary) from e

        finest = outcomes[-1]
        report = finest.report
        report.refinement = [
            LadderEntry.from_report(rung.resolution, outcome.report)
            for rung, outcome in zip(rungs, outcomes)
        ]
        outputs = [p for o in outcomes for p in o.outputs]
        outputs.extend(ReportWriter.write_report(report, directory))
        verdict = _verdict(report, config)
        write_manifest(
            directory,
            config,
            outputs,
            STATUS_OK,
            {
                'plan': self.plan,
                'verdict': verdict.to_dict(),
                'metadata': report.metadata,
                'trace': finest.trace_summary,
            },
        )
        return RunOutcome(
            STATUS_OK, directory, report, outputs, verdict, finest.trace_summary
        )
