"""Flat binary field snapshots.

Layout (little endian)::

    8 bytes   magic b"BLSNAP1\\0"
    uint32    ndim
    uint32    ncomp
    uint64    dims[ndim]        cells per axis
    float64   spacing
    float64   origin[ndim]      lower corner of the grid
    float64   time
    float64   data[ncomp, dims...]   row-major (C order)
"""

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"BLSNAP1\0"


@dataclass
class Snapshot:
    time: float
    spacing: float
    origin: tuple
    data: np.ndarray  # shape (ncomp, *dims)

    @property
    def dims(self):
        return self.data.shape[1:]


def write_snapshot(path, snap):
    data = np.ascontiguousarray(snap.data, dtype="<f8")
    ndim = data.ndim - 1
    if len(snap.origin) != ndim:
        raise ValueError("origin must have one entry per grid axis")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", ndim, data.shape[0]))
        fh.write(struct.pack(f"<{ndim}Q", *data.shape[1:]))
        fh.write(struct.pack("<d", snap.spacing))
        fh.write(struct.pack(f"<{ndim}d", *snap.origin))
        fh.write(struct.pack("<d", snap.time))
        fh.write(data.tobytes(order="C"))


def read_snapshot(path):
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError(f"{path}: not a snapshot file")
        ndim, ncomp = struct.unpack("<II", fh.read(8))
        dims = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        (spacing,) = struct.unpack("<d", fh.read(8))
        origin = struct.unpack(f"<{ndim}d", fh.read(8 * ndim))
        (time,) = struct.unpack("<d", fh.read(8))
        count = ncomp * int(np.prod(dims))
        data = np.frombuffer(fh.read(8 * count), dtype="<f8")
    if data.size != count:
        raise ValueError(f"{path}: truncated body")
    return Snapshot(time, spacing, origin, data.reshape((ncomp,) + tuple(dims)).astype(float))
