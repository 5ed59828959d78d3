"""Field sample serialization.

Binary layout (little endian): magic b"STWM", u32 format version, u32 d,
u32 n_times, u32 n_points, u32 n_paths, then the float64 values row-major
as (path, time, point), then the time grid, then the space points (row-major
(n_points, d)). CSV export uses '.' decimals and 17 significant digits so
float64 values round-trip through text.
"""

import struct

import numpy as np

from .sampler import FieldSample, TimeGrid

__all__ = ["write_field", "read_field", "write_field_csv", "FORMAT_VERSION", "MAGIC"]

MAGIC = b"STWM"
FORMAT_VERSION = 1


def write_field(path, sample: FieldSample) -> None:
    values = np.ascontiguousarray(sample.values, dtype="<f8")
    n_paths, n_times, n_points = values.shape
    pts = np.ascontiguousarray(np.atleast_2d(sample.space_points), dtype="<f8")
    if pts.shape[0] != n_points:
        pts = pts.T
    d = pts.shape[1]
    times = np.ascontiguousarray(sample.times.points, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<5I", FORMAT_VERSION, d, n_times, n_points, n_paths))
        fh.write(values.tobytes())
        fh.write(times.tobytes())
        fh.write(pts.tobytes())


def read_field(path) -> FieldSample:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a field file: bad magic {magic!r}")
        version, d, n_times, n_points, n_paths = struct.unpack("<5I", fh.read(20))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported field file version {version}")
        values = np.frombuffer(fh.read(8 * n_paths * n_times * n_points), dtype="<f8")
        values = values.reshape(n_paths, n_times, n_points).copy()
        times = np.frombuffer(fh.read(8 * n_times), dtype="<f8").copy()
        pts = np.frombuffer(fh.read(8 * n_points * d), dtype="<f8").reshape(n_points, d).copy()
    return FieldSample(times=TimeGrid(times), space_points=pts, values=values, seed_record=None)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _point_label(coords) -> str:
    return "x" + "_".join(_fmt(c) for c in np.atleast_1d(coords))


def write_field_csv(path, sample: FieldSample) -> None:
    """One row per (path, time); one column per space point."""
    pts = np.atleast_2d(sample.space_points)
    header = "path,time," + ",".join(_point_label(p) for p in pts)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for p in range(sample.values.shape[0]):
            for it, t in enumerate(sample.times.points):
                row = sample.values[p, it]
                fh.write(f"{p},{_fmt(t)}," + ",".join(_fmt(v) for v in row) + "\n")
