#!/usr/bin/env python3
"""
Console output for the shearflow command line.
"""

from __future__ import annotations
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import pandas as pd

from models.run_config import RunConfig

SUMMARY_COLUMNS = [
    't',
    'l2_norm',
    'grad_l2_norm',
    'h2_norm',
    'energy_residual',
    'int_t_h2_sq',
    'int_l2_p',
]

VERDICT_ICONS = {'satisfied': '✅', 'violated': '❌', 'inconclusive': '⚠️ '}


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return '-'
        return f"{value:.6g}"
    return str(value)


class CLIPrinter:
    """
    Static helpers that print human-facing results.
    """

    @staticmethod
    def print_loading_message(config: RunConfig) -> None:
        grid = config.grid
        if config.geometry == 'torus':
            shape = f"N={grid.n}"
        else:
            shape = f"N1={grid.n1} N2={grid.n2}"
        ladder = f", ladder {grid.ladder}" if grid.ladder else ""
        params = config.params
        print(f"🌊 Running {config.geometry} flow ({shape}{ladder})")
        solver = config.solver
        print(
            f"   p={params.p:g}  delta={params.delta:g}  "
            f"nu0={params.nu0:g}  nu1={params.nu1:g}"
        )
        print(
            f"   {solver.scheme}, dt={solver.dt:g}, T={solver.T:g}, seed={solver.seed}"
        )

    @staticmethod
    def print_run_summary(
        status: str,
        directory: Path,
        report_frame: pd.DataFrame,
        verdict: Optional[Dict[str, Any]] = None,
    ) -> None:
        icon = '✅' if status == 'ok' else '❌'
        print(f"\n{icon} Run {status}: {len(report_frame)} monitor sample(s)")
        if len(report_frame):
            CLIPrinter.print_table(
                report_frame.tail(1), SUMMARY_COLUMNS, title='Final sample'
            )
        if verdict is not None:
            CLIPrinter.print_verdict(verdict)
        print(f"\n📁 Outputs written to: {directory}")

    @staticmethod
    def print_verdict(verdict: Dict[str, Any]) -> None:
        icon = VERDICT_ICONS.get(verdict.get('verdict'), '•')
        exponent = _fmt(verdict.get('pExponent'))
        print(f"\n{icon} Uniqueness criterion (p={exponent}): {verdict.get('verdict')}")
        print(f"   {verdict.get('reason')}")
        resolutions = verdict.get('resolutions') or []
        if resolutions:
            print(f"   {'N':>6} {'int ||u||^p':>16} {'int t||u||_2,2^2':>18}")
            ladder_l2_p = verdict.get('ladderL2P', [])
            ladder_t_h2_sq = verdict.get('ladderTH2Sq', [])
            for n, a, b in zip(resolutions, ladder_l2_p, ladder_t_h2_sq):
                print(f"   {n:>6} {_fmt(a):>16} {_fmt(b):>18}")

    @staticmethod
    def print_table(
        frame: pd.DataFrame, columns: Sequence[str], title: Optional[str] = None
    ) -> None:
        shown = [c for c in columns if c in frame.columns]
        if title:
            print(f"\n📊 {title}")
        header = ''.join(f"{c:>16}" for c in shown)
        print(f"   {header}")
        for _, row in frame[shown].iterrows():
            print('   ' + ''.join(f"{_fmt(float(row[c])):>16}" for c in shown))

    @staticmethod
    def print_summary(summary: pd.DataFrame, title: str) -> None:
        """Print a column-indexed summary (initial, min, max, final)."""
        print(f"\n📊 {title}")
        print(f"   {'column':<22}" + ''.join(f"{c:>16}" for c in summary.columns))
        for name, row in summary.iterrows():
            print(f"   {name:<22}" + ''.join(f"{_fmt(float(v)):>16}" for v in row))

    @staticmethod
    def print_trace_summary(
        particles: int,
        summary: Optional[Dict[str, Any]],
        forward_backward: Optional[float],
        directory: Path,
    ) -> None:
        print(f"\n🧭 Traced {particles} particle(s)")
        if forward_backward is not None:
            print(f"   Forward-backward error: {forward_backward:.3e}")
        if summary is not None:
            inside = '✅' if summary['withinEnvelope'] else '⚠️ '
            print(
                f"   Fitted log-Lipschitz L = {summary['logLipschitzConstant']:.4g}, "
                f"Lipschitz L = {summary['lipschitzConstant']:.4g}"
            )
            print(
                f"   {inside} separation {summary['initialSeparation']:.3e} -> "
                f"{summary['finalSeparation']:.3e} (margin {summary['margin']:g})"
            )
        print(f"📁 Trajectories written to: {directory}")

    @staticmethod
    def print_selftest_results(results: Iterable[Dict[str, Any]]) -> bool:
        rows = list(results)
        print("\n🔬 Invariant suite")
        for result in rows:
            icon = '✅' if result['passed'] else '❌'
            print(f"   {icon} {result['name']}: {result['detail']}")
        passed = sum(1 for r in rows if r['passed'])
        print(f"\n{passed}/{len(rows)} checks passed")
        return passed == len(rows)

    @staticmethod
    def print_violations(violations: List[str]) -> None:
        count = len(violations)
        print(f"❌ Configuration rejected ({count} violation(s)):", file=sys.stderr)
        for violation in violations:
            print(f"   - {violation}", file=sys.stderr)

    @staticmethod
    def print_error(message: str) -> None:
        print(f"❌ Error: {message}", file=sys.stderr)

    @staticmethod
    def print_file_written(label: str, path: Path) -> None:
        print(f"📁 {label} saved to: {path}")
