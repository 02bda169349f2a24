"""NSSF snapshot files.

Layout (little-endian throughout):

    magic   4 bytes  b"NSSF"
    version u32
    n1, n2, n3  u32 each (modes per axis; cubic grids have n1 = n2 = n3)
    box_length, time_tag, mollifier_width  f64 each
    3 components x n^3 complex coefficients, each stored as two f64
    (real, imag), component-major, slowest index k1
"""

import struct

import numpy as np

from .errors import InvalidArgument
from .fields import SpectralVectorField
from .grid import GridSpec

MAGIC = b"NSSF"
VERSION = 1
_HEADER = struct.Struct("<4sIIII ddd".replace(" ", ""))


def write_snapshot(path, field: SpectralVectorField, mollifier_width: float = 0.0) -> None:
    n = field.grid.n_per_axis
    header = _HEADER.pack(
        MAGIC, VERSION, n, n, n,
        field.grid.box_length, field.time_tag, mollifier_width,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for c in field.components:
            fh.write(np.ascontiguousarray(c, dtype="<c16").tobytes())


def read_snapshot(path, dealias_fraction: float = 2.0 / 3.0):
    """Returns (field, mollifier_width). The dealias rule is not stored in
    the format; callers pass their own (default 2/3)."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise InvalidArgument(f"{path}: truncated NSSF header")
        magic, version, n1, n2, n3, box_length, time_tag, width = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise InvalidArgument(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise InvalidArgument(f"{path}: unsupported NSSF version {version}")
        if not (n1 == n2 == n3):
            raise InvalidArgument(f"{path}: non-cubic grid {(n1, n2, n3)}")
        count = n1 * n2 * n3
        comps = []
        for _ in range(3):
            buf = np.frombuffer(fh.read(16 * count), dtype="<c16", count=count)
            comps.append(buf.reshape(n1, n2, n3).astype(np.complex128))
    grid = GridSpec(n1, box_length, dealias_fraction)
    field = SpectralVectorField.from_components(grid, *comps, time_tag=time_tag)
    return field, width
