#!/usr/bin/env python3
"""
SF2D binary snapshots.

Layout (little-endian, no padding): magic b"SF2D", version u32, N u32,
geometry u8 (0 torus, 1 channel), time f64; channel files add N2 u32.
The payload is row-major f64 grid values of u1 then u2, followed on the
channel by the cell-centered pressure. docs/format.md has the details.
"""

from __future__ import annotations
import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from models.channel_field import ChannelField, ChannelGrid
from models.errors import SnapshotFormatError
from models.torus_field import TorusField, TorusGrid
from models.velocity_history import VelocityHistory

logger = logging.getLogger(__name__)

MAGIC = b'SF2D'
FORMAT_VERSION = 1
GEOMETRY_TAGS = {'torus': 0, 'channel': 1}
SNAPSHOT_SUFFIX = '.sf2d'

HEADER_DTYPE = np.dtype([
    ('magic', 'S4'),
    ('version', '<u4'),
    ('n', '<u4'),
    ('geometry', 'u1'),
    ('time', '<f8'),
])
CHANNEL_EXTRA_DTYPE = np.dtype([('n2', '<u4')])
PAYLOAD_DTYPE = np.dtype('<f8')

Snapshot = Union[TorusField, ChannelField]


def write_snapshot(path: Union[str, Path], field: Snapshot, time: float) -> Path:
    """
    Write one field to an SF2D file.

    Args:
        path: Destination file
        field: TorusField or ChannelField
        time: Simulation time stored in the header

    Returns:
        The path written
    """
    path = Path(path)
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header['magic'] = MAGIC
    header['version'] = FORMAT_VERSION
    header['time'] = time
    if isinstance(field, TorusField):
        header['n'] = field.n
        header['geometry'] = GEOMETRY_TAGS['torus']
        payload = field.physical.astype(PAYLOAD_DTYPE).tobytes(order='C')
        chunks = [header.tobytes(), payload]
    else:
        header['n'] = field.grid.n1
        header['geometry'] = GEOMETRY_TAGS['channel']
        extra = np.array([(field.grid.n2,)], dtype=CHANNEL_EXTRA_DTYPE)
        chunks = [
            header.tobytes(),
            extra.tobytes(),
            field.velocity.astype(PAYLOAD_DTYPE).tobytes(order='C'),
            field.pressure.astype(PAYLOAD_DTYPE).tobytes(order='C'),
        ]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b''.join(chunks))
    logger.debug("Wrote snapshot %s at t=%.6g", path, time)
    return path


def read_snapshot(path: Union[str, Path]) -> Tuple[Snapshot, float]:
    """
    Read an SF2D file.

    Returns:
        (field, time)

    Raises:
        SnapshotFormatError: Bad magic, version, geometry tag or payload size
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < HEADER_DTYPE.itemsize:
        raise SnapshotFormatError(f"{path}: file shorter than the SF2D header")
    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    if bytes(header['magic']) != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {bytes(header['magic'])!r}")
    if int(header['version']) != FORMAT_VERSION:
        raise SnapshotFormatError(
            f"{path}: unsupported version {int(header['version'])}"
        )
    n = int(header['n'])
    time = float(header['time'])
    offset = HEADER_DTYPE.itemsize
    tag = int(header['geometry'])

    if tag == GEOMETRY_TAGS['torus']:
        expected = 2 * n * n
        payload = _payload(path, data, offset, expected)
        return TorusField.from_physical(TorusGrid(n), payload.reshape(2, n, n)), time

    if tag == GEOMETRY_TAGS['channel']:
        if len(data) < offset + CHANNEL_EXTRA_DTYPE.itemsize:
            raise SnapshotFormatError(f"{path}: truncated channel header")
        extra = np.frombuffer(data, dtype=CHANNEL_EXTRA_DTYPE, count=1, offset=offset)
        n2 = int(extra[0]['n2'])
        offset += CHANNEL_EXTRA_DTYPE.itemsize
        grid = ChannelGrid(n, n2)
        nodes = n * (n2 + 1)
        payload = _payload(path, data, offset, 2 * nodes + n * n2)
        velocity = payload[:2 * nodes].reshape((2,) + grid.node_shape)
        pressure = payload[2 * nodes:].reshape(grid.cell_shape)
        return ChannelField(grid, velocity, pressure, time), time

    raise SnapshotFormatError(f"{path}: unknown geometry tag {tag}")


def _payload(path: Path, data: bytes, offset: int, count: int) -> np.ndarray:
    expected = offset + count * PAYLOAD_DTYPE.itemsize
    if len(data) != expected:
        raise SnapshotFormatError(
            f"{path}: expected {expected} bytes, found {len(data)}"
        )
    values = np.frombuffer(data, dtype=PAYLOAD_DTYPE, count=count, offset=offset)
    return values.astype(float)


def snapshot_name(step: int) -> str:
    return f"snapshot_{step:08d}{SNAPSHOT_SUFFIX}"


def list_snapshots(directory: Union[str, Path]) -> List[Path]:
    return sorted(Path(directory).glob(f"*{SNAPSHOT_SUFFIX}"))


def read_history(directory: Union[str, Path]) -> VelocityHistory:
    """
    Load every snapshot in a directory as a VelocityHistory ordered by time.

    Raises:
        SnapshotFormatError: If the directory holds no snapshots
    """
    paths = list_snapshots(directory)
    if not paths:
        raise SnapshotFormatError(f"no {SNAPSHOT_SUFFIX} files in {directory}")
    loaded = sorted((read_snapshot(p) for p in paths), key=lambda item: item[1])
    return VelocityHistory([t for _, t in loaded], [f for f, _ in loaded])
