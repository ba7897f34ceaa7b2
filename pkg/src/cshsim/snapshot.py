"""Bit-exact binary snapshot format for full dynamical states.

Layout (little-endian):
    magic   4 bytes  b"CSH2"
    version u32
    n       u32
    L       f64
    t       f64
    sigma   i8
    phi     n*n complex128 as interleaved (re, im) f64, row-major
    u       same as phi
    a0      n*n f64, row-major
    a1      same
    a2      same
    crc     u32, CRC32 of everything after the magic
"""

from __future__ import annotations

import os
import struct
import tempfile
import zlib

import numpy as np

from .errors import SnapshotFormatError
from .grid import GridSpec, ScalarField
from .model import CshState

MAGIC = b"CSH2"
VERSION = 1
_HEADER = struct.Struct("<II d d b")


def _complex_bytes(f: ScalarField) -> bytes:
    data = np.ascontiguousarray(f.physical().data, dtype=np.complex128)
    return data.tobytes()


def _real_bytes(f: ScalarField) -> bytes:
    data = np.ascontiguousarray(f.physical().data.real, dtype=np.float64)
    return data.tobytes()


def write_snapshot(state: CshState, path: str) -> None:
    """Atomically write a state snapshot."""
    grid = state.phi.grid
    payload = _HEADER.pack(VERSION, grid.n, grid.period_length, state.t,
                           int(state.sign_sigma))
    payload += _complex_bytes(state.phi)
    payload += _complex_bytes(state.u)
    payload += _real_bytes(state.a0)
    payload += _real_bytes(state.a1)
    payload += _real_bytes(state.a2)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    blob = MAGIC + payload + struct.pack("<I", crc)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_snapshot(path: str, dealias_fraction: float = 2.0 / 3.0) -> CshState:
    """Read a snapshot back into a state (gauge fields taken as stored)."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise SnapshotFormatError(f"cannot read snapshot {path!r}: {exc}") from exc
    if len(blob) < len(MAGIC) + _HEADER.size + 4 or blob[:4] != MAGIC:
        raise SnapshotFormatError(f"{path!r} is not a snapshot file")
    payload, crc_bytes = blob[4:-4], blob[-4:]
    (crc_stored,) = struct.unpack("<I", crc_bytes)
    if zlib.crc32(payload) & 0xFFFFFFFF != crc_stored:
        raise SnapshotFormatError(f"{path!r} failed its checksum")
    version, n, L, t, sigma = _HEADER.unpack_from(payload)
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    expect = _HEADER.size + 2 * n * n * 16 + 3 * n * n * 8
    if len(payload) != expect:
        raise SnapshotFormatError(
            f"{path!r} has {len(payload)} payload bytes, expected {expect}")
    grid = GridSpec(n, L, dealias_fraction)
    off = _HEADER.size

    def take_complex():
        nonlocal off
        arr = np.frombuffer(payload, dtype=np.complex128, count=n * n,
                            offset=off).reshape(n, n)
        off += n * n * 16
        return ScalarField.from_physical(grid, arr.copy(), "complex")

    def take_real():
        nonlocal off
        arr = np.frombuffer(payload, dtype=np.float64, count=n * n,
                            offset=off).reshape(n, n)
        off += n * n * 8
        return ScalarField.from_physical(grid, arr.copy(), "real")

    phi = take_complex()
    u = take_complex()
    a0 = take_real()
    a1 = take_real()
    a2 = take_real()
    return CshState(t=t, phi=phi, u=u, a0=a0, a1=a1, a2=a2, sign_sigma=sigma)
