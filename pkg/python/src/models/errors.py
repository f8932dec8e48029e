#!/usr/bin/env python3
"""
Exception types raised across the shearflow package.
"""

from __future__ import annotations
from typing import List, Optional


class ShearflowError(Exception):
    """Base class for every error raised by shearflow."""


class InvalidInputError(ShearflowError, ValueError):
    """An argument violates the precondition of an operation."""


class SingularPointError(InvalidInputError):
    """The stress Jacobian was requested at delta = 0 and D = 0."""


class DomainError(InvalidInputError):
    """A parameter lies outside the range an operation is valid for."""


class SnapshotFormatError(InvalidInputError):
    """An SF2D snapshot file is malformed."""


class RejectedStepError(ShearflowError, ArithmeticError):
    """A time step was rejected (CFL heuristic or non-finite state)."""

    def __init__(self, message: str, time: Optional[float] = None) -> None:
        super().__init__(message)
        self.time = time


class ConfigSyntaxError(ShearflowError, ValueError):
    """The configuration file is not valid TOML."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        location = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line


class ConfigValidationError(ShearflowError, ValueError):
    """
    The configuration parsed but violates one or more rules.

    Attributes:
        violations: Every violated rule, not just the first one found
    """

    def __init__(self, violations: List[str]) -> None:
        self.violations = list(violations)
        summary = "; ".join(self.violations)
        count = len(self.violations)
        super().__init__(f"{count} configuration violation(s): {summary}")
