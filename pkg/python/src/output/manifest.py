#!/usr/bin/env python3
"""
manifest.json: config hash, library versions and output checksums.
"""

from __future__ import annotations
import hashlib
import json
import logging
import platform
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
import scipy

from models.run_config import RunConfig
from output.report_writer import write_json
from version import __version__

logger = logging.getLogger(__name__)

MANIFEST_FILE = 'manifest.json'


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as file:
        for chunk in iter(lambda: file.read(1 << 20), b''):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(config: RunConfig) -> str:
    """sha256 of the canonical JSON form of the config."""
    canonical = json.dumps(
        config.to_dict(), sort_keys=True, separators=(',', ':'), default=str
    )
    return sha256_bytes(canonical.encode('utf-8'))


def library_versions() -> Dict[str, str]:
    return {
        'shearflow': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
    }


def write_manifest(
    directory: Union[str, Path],
    config: RunConfig,
    outputs: Iterable[Path],
    status: str,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Record a run directory's provenance.

    Args:
        directory: Run directory; output paths are stored relative to it
        config: The config that was run
        outputs: Files to checksum
        status: 'ok' or 'failed'
        extra: Verdicts, ladder plan and other run results

    Returns:
        Path of manifest.json
    """
    root = Path(directory)
    checksums = {}
    for path in sorted(set(Path(p) for p in outputs)):
        if path.exists():
            checksums[path.relative_to(root).as_posix()] = sha256_file(path)
    manifest = {
        'configHash': config_hash(config),
        'configSource': config.source,
        'config': config.to_dict(),
        'versions': library_versions(),
        'status': status,
        'outputs': checksums,
    }
    if extra:
        manifest.update(extra)
    path = write_json(manifest, root / MANIFEST_FILE)
    logger.info("Wrote manifest with %d checksum(s) to %s", len(checksums), path)
    return path


def verify_manifest(directory: Union[str, Path]) -> List[str]:
    """
    Compare the recorded checksums with the files on disk.

    Returns:
        Relative paths that are missing or whose contents changed
    """
    root = Path(directory)
    with open(root / MANIFEST_FILE, 'r', encoding='utf-8') as file:
        manifest = json.load(file)
    mismatched = []
    for name, expected in sorted(manifest.get('outputs', {}).items()):
        path = root / name
        if not path.exists() or sha256_file(path) != expected:
            mismatched.append(name)
    return mismatched
