"""Binary field files and surface-spectrum CSVs.

A field file is a 64 byte header followed by the Fourier coefficients as
little-endian complex64 in C order.  Header layout (little-endian):

    magic  4s   b"VWF1"
    d      u32  horizontal dimension
    npts   u32  points per horizontal axis
    nodes  u32  vertical nodes (0 for surface fields)
    ncomp  u32  number of components (0 for a scalar field)
    L      f64  torus period
    b      f64  slab depth
    pad    to 64 bytes

Coefficients are stored in single precision, so reading back gives the
original rounded to complex64.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"VWF1"
_HEADER = struct.Struct("<4sIIIIdd")
HEADER_SIZE = 64


class FieldFormatError(ValueError):
    pass


@dataclass(frozen=True)
class FieldHeader:
    d: int
    npts: int
    nodes: int
    ncomp: int
    L: float
    b: float

    def shape(self) -> tuple:
        sh = (self.npts,) * self.d
        if self.ncomp:
            sh = (self.ncomp,) + sh
        if self.nodes:
            sh = sh + (self.nodes,)
        return sh


def write_field(path, coeffs: np.ndarray, d: int, L: float, b: float, nodes: int = 0, ncomp: int = 0) -> Path:
    """Write coefficients with the header; ``coeffs.shape`` must match the header shape."""
    path = Path(path)
    coeffs = np.asarray(coeffs)
    npts = coeffs.shape[1 if ncomp else 0]
    hdr = FieldHeader(d=d, npts=npts, nodes=nodes, ncomp=ncomp, L=float(L), b=float(b))
    if coeffs.shape != hdr.shape():
        raise FieldFormatError(f"array shape {coeffs.shape} does not match header shape {hdr.shape()}")
    raw = _HEADER.pack(MAGIC, d, npts, nodes, ncomp, float(L), float(b))
    raw = raw + b"\0" * (HEADER_SIZE - len(raw))
    with open(path, "wb") as fh:
        fh.write(raw)
        fh.write(np.ascontiguousarray(coeffs, dtype="<c8").tobytes())
    return path


def read_field(path) -> tuple[np.ndarray, FieldHeader]:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
        if len(head) < HEADER_SIZE:
            raise FieldFormatError(f"{path}: truncated header")
        magic, d, npts, nodes, ncomp, L, b = _HEADER.unpack_from(head)
        if magic != MAGIC:
            raise FieldFormatError(f"{path}: bad magic {magic!r}")
        hdr = FieldHeader(d=d, npts=npts, nodes=nodes, ncomp=ncomp, L=L, b=b)
        body = fh.read()
    count = int(np.prod(hdr.shape()))
    if len(body) != 8 * count:
        raise FieldFormatError(f"{path}: expected {count} complex64 values, found {len(body) // 8}")
    arr = np.frombuffer(body, dtype="<c8").reshape(hdr.shape()).astype(complex)
    return arr, hdr


def write_surface_csv(path, coeffs: np.ndarray) -> Path:
    """One row per mode: integer index per axis (signed), Re, Im."""
    path = Path(path)
    coeffs = np.asarray(coeffs)
    d = coeffs.ndim
    npts = coeffs.shape[0]
    kint = np.fft.fftfreq(npts, 1.0 / npts).astype(int)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"k{j + 1}" for j in range(d)] + ["re", "im"])
        for idx in np.ndindex(coeffs.shape):
            c = coeffs[idx]
            w.writerow([int(kint[i]) for i in idx] + [repr(float(c.real)), repr(float(c.imag))])
    return path


def read_surface_csv(path, npts: int | None = None) -> np.ndarray:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FieldFormatError(f"{path}: empty file")
    d = len(rows[0]) - 2
    body = rows[1:]
    if npts is None:
        npts = round(len(body) ** (1.0 / d))
    out = np.zeros((npts,) * d, dtype=complex)
    for row in body:
        idx = tuple(int(v) % npts for v in row[:d])
        out[idx] = complex(float(row[d]), float(row[d + 1]))
    return out


def write_profile_csv(path, x: np.ndarray, values: np.ndarray, names=("x", "eta")) -> Path:
    """Physical profile on a 1-D grid (used for eta(x) exports)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names))
        for a, v in zip(np.asarray(x).ravel(), np.asarray(values).ravel()):
            w.writerow([repr(float(a)), repr(float(v))])
    return path
