#!/usr/bin/env python3
"""
Thread cap for data-parallel kernels.

The SHEARFLOW_THREADS environment variable caps the number of worker
threads handed to scipy.fft. The default of one worker keeps runs
bit-reproducible across machines with different core counts.
"""

from __future__ import annotations
import logging
import os

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = 'SHEARFLOW_THREADS'


def fft_workers() -> int:
    """
    Number of FFT worker threads allowed by the environment.

    Returns:
        Positive worker count; 1 when the variable is unset or invalid
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == '':
        return 1
    try:
        workers = int(raw)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", THREADS_ENV_VAR, raw)
        return 1
    if workers < 1:
        logger.warning("Ignoring non-positive %s=%r", THREADS_ENV_VAR, raw)
        return 1
    return min(workers, os.cpu_count() or 1)
