"""Binary snapshots and CSV output.

Snapshot layout (all little-endian), 32-byte header followed by payload:

    offset  size  field
    0       4     magic "ZKBF"
    4       2     version (u16), currently 1
    6       4     nx (u32)
    10      4     ny (u32)
    14      8     lx (f64)
    22      8     ly (f64)
    30      2     reserved, zero

Payload: nx*ny complex coefficients as (re, im) f64 pairs, C row-major
over (k_x, k_y) in fft index order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import GridSpec, SpectralField

MAGIC = b"ZKBF"
VERSION = 1
_HEADER = struct.Struct("<4sHIIdd2x")
assert _HEADER.size == 32


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(f: SpectralField, path) -> None:
    g = f.grid
    header = _HEADER.pack(MAGIC, VERSION, g.nx, g.ny, g.lx, g.ly)
    payload = np.ascontiguousarray(f.coeffs, dtype=np.complex128).tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path, dealias_fraction: float = 2.0 / 3.0) -> SpectralField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header")
    magic, version, nx, ny, lx, ly = _HEADER.unpack(raw[: _HEADER.size])
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + nx * ny * 16
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: payload size {len(raw) - _HEADER.size} != {nx * ny * 16}"
        )
    coeffs = np.frombuffer(raw[_HEADER.size:], dtype=np.complex128).reshape(nx, ny)
    grid = GridSpec(nx=nx, ny=ny, lx=lx, ly=ly, dealias_fraction=dealias_fraction)
    return SpectralField(grid, coeffs.copy())


def format_float(x: float) -> str:
    """Scientific notation with 17 significant digits, '.' decimal."""
    return f"{x:.16e}"


def write_csv(path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            format_float(v) if isinstance(v, float) else str(v) for v in row
        ))
    Path(path).write_text("\n".join(lines) + "\n")
