"""Checkpoint file format: a flat map from text path to one array.

Layout (everything little-endian):
    magic   8 bytes  b"TSFUSEC1"
    count   uint32
    entries, sorted by path:
        path_len  uint16, path utf-8 bytes
        dtype_len uint8,  numpy dtype string (e.g. "<f4")
        ndim      uint8,  dims int64[ndim]
        raw C-order array bytes
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"TSFUSEC1"


def save_arrays(path, arrays: dict[str, np.ndarray]) -> None:
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(arrays)))
        for key in sorted(arrays):
            arr = np.ascontiguousarray(arrays[key])
            dt = arr.dtype.newbyteorder("<")
            arr = arr.astype(dt, copy=False)
            name = key.encode("utf-8")
            dts = dt.str.encode("ascii")
            f.write(struct.pack("<H", len(name)))
            f.write(name)
            f.write(struct.pack("<B", len(dts)))
            f.write(dts)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}q", *arr.shape))
            f.write(arr.tobytes())


def load_arrays(path) -> dict[str, np.ndarray]:
    path = Path(path)
    out: dict[str, np.ndarray] = {}
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path} is not a tsfuse checkpoint (bad magic {magic!r})")
        (count,) = struct.unpack("<I", f.read(4))
        for _ in range(count):
            (nlen,) = struct.unpack("<H", f.read(2))
            key = f.read(nlen).decode("utf-8")
            (dlen,) = struct.unpack("<B", f.read(1))
            dts = f.read(dlen).decode("ascii")
            (ndim,) = struct.unpack("<B", f.read(1))
            shape = struct.unpack(f"<{ndim}q", f.read(8 * ndim)) if ndim else ()
            dt = np.dtype(dts)
            nbytes = int(np.prod(shape, dtype=np.int64)) * dt.itemsize if ndim else dt.itemsize
            raw = f.read(nbytes)
            if len(raw) != nbytes:
                raise ValueError(f"{path}: truncated data for entry {key!r}")
            out[key] = np.frombuffer(raw, dtype=dt).reshape(shape).copy()
    return out
