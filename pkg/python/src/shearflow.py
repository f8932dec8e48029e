#!/usr/bin/env python3
"""
shearflow - Command Line Interface

Runs the torus and channel solvers from TOML configs, traces particles
through saved velocity histories, summarizes finished reports and runs
the invariant self-test suite.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, NoReturn, Optional, Tuple

import numpy as np
import pandas as pd

from data.config_loader import ConfigLoader
from fields.snapshot_io import read_history
from models.errors import ConfigSyntaxError, ConfigValidationError, ShearflowError
from models.trajectory_bundle import BundleSpec
from monitors.dashti_robinson import DRThresholds, dashti_robinson_check
from output.cli_printer import CLIPrinter
from output.manifest import MANIFEST_FILE
from output.report_renderer import ReportRenderer
from output.report_writer import ReportWriter, write_json
from particles.diagnostics import separation_diagnostics
from particles.interpolation import SPATIAL_SCHEMES
from particles.tracer import forward_backward_error
from shearflow_runner import SNAPSHOT_DIR, ShearflowRunner

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

logger = logging.getLogger('shearflow')


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog='shearflow',
        description='Shear-thinning flow simulation with regularity monitors',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  shearflow run-torus recipes/torus_taylor_green.toml
  shearflow run-channel recipes/channel_poiseuille.toml --output-dir out/poiseuille
  shearflow trace --history out/tg --points seeds.csv --eps 1e-4 --dt 1e-2
  shearflow report out/tg
  shearflow selftest
        '''
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        '--verbose', '-v', action='store_true', help='Debug logging'
    )
    verbosity.add_argument(
        '--quiet', '-q', action='store_true', help='Warnings and errors only'
    )
    commands = parser.add_subparsers(
        dest='command', required=True, parser_class=_Parser
    )

    for name, geometry in (('run-torus', 'torus'), ('run-channel', 'channel')):
        run = commands.add_parser(
            name, help=f'Run the {geometry} solver from a TOML config'
        )
        run.add_argument('config', help='Path of the TOML config')
        run.add_argument('--output-dir', help='Override output.directory')
        run.add_argument(
            '--parallel',
            action='store_true',
            help='Run ladder rungs in worker processes',
        )
        run.set_defaults(geometry=geometry)

    tracer = commands.add_parser(
        'trace', help='Trace particles through a saved velocity history'
    )
    tracer.add_argument(
        '--history',
        required=True,
        help='Run directory or directory of .sf2d snapshots',
    )
    tracer.add_argument(
        '--points', required=True, help='CSV of seed points (columns x1, x2)'
    )
    tracer.add_argument(
        '--eps', type=float, default=0.0, help='Perturbation radius around each seed'
    )
    tracer.add_argument('--dt', type=float, required=True, help='Runge-Kutta step')
    tracer.add_argument(
        '--perturbations', type=int, default=4, help='Companions per seed when eps > 0'
    )
    tracer.add_argument(
        '--scheme',
        choices=SPATIAL_SCHEMES,
        default='spectral',
        help='Torus interpolation',
    )
    tracer.add_argument(
        '--output-dir',
        help='Where to write trajectories.csv (default: the history directory)',
    )

    report = commands.add_parser('report', help='Summarize a finished run directory')
    report.add_argument('directory', help='Run directory holding report.csv')
    report.add_argument(
        '--p',
        type=float,
        help='Exponent of the uniqueness criterion (default: from manifest)',
    )
    report.add_argument(
        '--plots',
        help='Directory for gnuplot .dat files (default: <directory>/plots)',
    )

    selftest = commands.add_parser('selftest', help='Run the invariant suite')
    selftest.add_argument(
        '--quick', action='store_true', help='Smaller samples and grids'
    )
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.verbose:
        level = logging.DEBUG
    else:
        level = logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(
        level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s'
    )


def cmd_run(args: argparse.Namespace) -> int:
    config = ConfigLoader.parse_config(args.config)
    if config.geometry != args.geometry:
        CLIPrinter.print_violations([
            f"{args.config} describes a {config.geometry} run; "
            f"use run-{config.geometry}"
        ])
        return EXIT_VALIDATION
    if args.output_dir:
        output = replace(config.output, directory=args.output_dir)
        config = replace(config, output=output)
    if args.parallel:
        config = replace(config, parallel=True)
    CLIPrinter.print_loading_message(config)
    outcome = ShearflowRunner(config).orchestrate()
    verdict = outcome.verdict.to_dict() if outcome.verdict is not None else None
    CLIPrinter.print_run_summary(
        outcome.status, outcome.directory, outcome.report.to_frame(), verdict
    )
    if outcome.trace_summary is not None:
        summary = outcome.trace_summary
        CLIPrinter.print_trace_summary(
            summary['particles'],
            summary.get('separation'),
            summary.get('forwardBackwardError'),
            outcome.directory,
        )
    return EXIT_OK


def _read_points(path: str) -> np.ndarray:
    frame = pd.read_csv(path)
    if {'x1', 'x2'} <= set(frame.columns):
        return frame[['x1', 'x2']].to_numpy(dtype=float)
    # headerless file: first two columns
    frame = pd.read_csv(path, header=None)
    return frame.iloc[:, :2].to_numpy(dtype=float)


def cmd_trace(args: argparse.Namespace) -> int:
    source = Path(args.history)
    snapshots = source / SNAPSHOT_DIR if (source / SNAPSHOT_DIR).is_dir() else source
    history = read_history(snapshots)
    perturbations = args.perturbations if args.eps > 0 else 0
    spec = BundleSpec(
        _read_points(args.points), eps=args.eps, perturbations=perturbations
    )
    round_trip = forward_backward_error(history, spec, args.dt, args.scheme)
    bundle = round_trip.forward
    target = Path(args.output_dir) if args.output_dir else source
    ReportWriter.write_trajectories(bundle, target)
    summary = None
    if bundle.particle_count >= 2:
        diagnostics = separation_diagnostics(bundle)
        ReportWriter.write_diagnostics(diagnostics, target)
        summary = diagnostics.summary()
    write_json(
        {
            'history': str(snapshots),
            'dtOde': args.dt,
            'scheme': args.scheme,
            'eps': args.eps,
            'particles': bundle.particle_count,
            'forwardBackwardError': round_trip.max_error,
            'separation': summary,
        },
        target / 'trace_summary.json',
    )
    CLIPrinter.print_trace_summary(
        bundle.particle_count, summary, round_trip.max_error, target
    )
    return EXIT_OK


def _manifest_monitors(directory: Path) -> Tuple[Optional[float], DRThresholds]:
    """Exponent and thresholds the run was configured with, if it left a manifest."""
    path = directory / MANIFEST_FILE
    if not path.exists():
        return None, DRThresholds()
    with open(path, 'r', encoding='utf-8') as file:
        config = json.load(file).get('config', {})
    monitors = config.get('monitors', {})
    thresholds = DRThresholds(
        stable=monitors.get('stableThreshold', DRThresholds.stable),
        divergent=monitors.get('divergentThreshold', DRThresholds.divergent),
    )
    exponent = monitors.get('drExponent')
    if exponent is None:
        exponent = config.get('params', {}).get('p')
    return exponent, thresholds


def cmd_report(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    report = ReportWriter.read_report(directory)
    configured, thresholds = _manifest_monitors(directory)
    exponent = args.p if args.p is not None else configured
    if exponent is None:
        CLIPrinter.print_error("no manifest.json to take the exponent from; pass --p")
        return EXIT_USAGE
    summary = ReportRenderer.summary_frame(report)
    CLIPrinter.print_summary(summary, title=f"{len(report)} samples in {directory}")
    verdict = dashti_robinson_check(report, float(exponent), thresholds)
    CLIPrinter.print_verdict(verdict.to_dict())
    plots = Path(args.plots) if args.plots else directory / 'plots'
    for path in ReportRenderer.write_plot_data(report, plots, verdict):
        CLIPrinter.print_file_written('Plot data', path)
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    from selftest import run_selftest

    results = run_selftest(quick=args.quick)
    passed = CLIPrinter.print_selftest_results(results)
    return EXIT_OK if passed else EXIT_NUMERICAL


COMMANDS = {
    'run-torus': cmd_run,
    'run-channel': cmd_run,
    'trace': cmd_trace,
    'report': cmd_report,
    'selftest': cmd_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the command line interface."""
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return COMMANDS[args.command](args)
    except ConfigSyntaxError as e:
        CLIPrinter.print_error(str(e))
        return EXIT_VALIDATION
    except ConfigValidationError as e:
        CLIPrinter.print_violations(e.violations)
        return EXIT_VALIDATION
    except FileNotFoundError as e:
        CLIPrinter.print_error(str(e))
        return EXIT_USAGE
    except ShearflowError as e:
        CLIPrinter.print_error(str(e))
        return EXIT_NUMERICAL
    except Exception as e:
        CLIPrinter.print_error(f"Unexpected error: {e}")
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
