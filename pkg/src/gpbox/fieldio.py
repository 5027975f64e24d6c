"""Field container formats.

Binary layout (documented contract):
  bytes 0..7    magic b"GPBXFLD1"
  bytes 8..11   uint32 little-endian header length N
  bytes 12..12+N-1   UTF-8 JSON header:
      {"d": int, "n": int, "L": float, "repr": "physical"|"spectral",
       "value_kind": "real-valued"|"complex-valued", "dtype": "complex128"}
  remaining     row-major (C-order) complex128 payload, n^d entries,
                little-endian interleaved (re, im) float64 pairs

The JSON codec keeps full float64 precision (Python repr round-trips) and is
meant for small fields in tests and over-the-wire use.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .spectral import Field, Grid

MAGIC = b"GPBXFLD1"


_DTYPES = {"complex128": "<c16", "complex64": "<c8"}


def save_field(f: Field, path, dtype: str = "complex128") -> None:
    if dtype not in _DTYPES:
        raise ValueError(f"dtype must be one of {sorted(_DTYPES)}")
    header = {"d": f.grid.d, "n": f.grid.n, "L": f.grid.L, "repr": f.repr,
              "value_kind": f.value_kind, "dtype": dtype}
    hb = json.dumps(header, sort_keys=True).encode()
    payload = np.ascontiguousarray(f.values).astype(_DTYPES[dtype])
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(hb)))
        fh.write(hb)
        fh.write(payload.tobytes(order="C"))


def load_field(path) -> Field:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path}: not a field container (bad magic)")
    (hlen,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12:12 + hlen].decode())
    grid = Grid(header["d"], header["n"], header["L"])
    vals = np.frombuffer(raw[12 + hlen:], dtype=_DTYPES[header["dtype"]])
    vals = vals.astype(np.complex128)
    if vals.size != grid.size:
        raise ValueError(f"{path}: payload size {vals.size} != {grid.size}")
    return Field(grid, vals.reshape(grid.shape).copy(), header["repr"],
                 header["value_kind"])


def field_to_json(f: Field) -> dict:
    return {
        "header": {"d": f.grid.d, "n": f.grid.n, "L": f.grid.L, "repr": f.repr,
                   "value_kind": f.value_kind},
        "re": f.values.real.ravel(order="C").tolist(),
        "im": f.values.imag.ravel(order="C").tolist(),
    }


def field_from_json(doc: dict) -> Field:
    h = doc["header"]
    grid = Grid(h["d"], h["n"], h["L"])
    vals = (np.asarray(doc["re"], dtype=float)
            + 1j * np.asarray(doc["im"], dtype=float)).reshape(grid.shape)
    return Field(grid, vals, h["repr"], h["value_kind"])
