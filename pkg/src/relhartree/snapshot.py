"""``.fld`` snapshots: one JSON header line, then little-endian float64 (re, im) pairs.

Values are written in row-major order with the x index varying fastest.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .spectral import Field, Grid, Representation

__all__ = ["write_field", "read_field"]

FORMAT = "relh-fld-1"


def write_field(path, field: Field, params: dict | None = None, time: float = 0.0, **extra) -> Path:
    path = Path(path)
    g = field.grid
    header = {
        "format": FORMAT,
        "dims": list(g.shape),
        "dim": g.dim,
        "box_length": g.box_length,
        "representation": field.representation.value,
        "params": params or {},
        "time": float(time),
    }
    header.update(extra)
    vals = np.asarray(field.values, dtype=np.complex128).ravel(order="F")
    pairs = np.empty(2 * vals.size, dtype="<f8")
    pairs[0::2] = vals.real
    pairs[1::2] = vals.imag
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(pairs.tobytes())
    return path


def read_field(path) -> tuple[Field, dict]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    dims = tuple(header["dims"])
    if raw.size != 2 * int(np.prod(dims)):
        raise ValueError(f"{path}: payload has {raw.size} floats, header expects {2 * np.prod(dims)}")
    vals = (raw[0::2] + 1j * raw[1::2]).reshape(dims, order="F")
    if not np.any(vals.imag):
        vals = vals.real
    grid = Grid(dims[0], header["box_length"], header.get("dim", len(dims)))
    return Field(grid, vals, Representation(header["representation"])), header
