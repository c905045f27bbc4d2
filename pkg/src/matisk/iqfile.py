"""MTSK IQ file format.

Little-endian header: magic ``b"MTSK"``, version (u16), sample rate in Hz
(f64), sample count (u64); followed by interleaved float32 (re, im) pairs.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .core import IqSignal

MAGIC = b"MTSK"
VERSION = 1
_HEADER = struct.Struct("<4sHdQ")


class IqFileError(ValueError):
    pass


def to_bytes(sig: IqSignal) -> bytes:
    payload = np.empty(2 * len(sig), dtype="<f4")
    payload[0::2] = sig.samples.real
    payload[1::2] = sig.samples.imag
    return _HEADER.pack(MAGIC, VERSION, float(sig.sample_rate_hz), len(sig)) + payload.tobytes()


def from_bytes(data: bytes) -> IqSignal:
    if len(data) < _HEADER.size:
        raise IqFileError("truncated header")
    magic, version, rate, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IqFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise IqFileError(f"unsupported version {version}")
    payload = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    if payload.size != 2 * count:
        raise IqFileError(f"header says {count} samples, payload holds {payload.size / 2:g}")
    # interleaved little-endian float32 pairs are exactly the <c8 layout
    samples = payload.view("<c8").astype(np.complex64)
    return IqSignal(samples=samples, sample_rate_hz=rate)


def write(path: Union[str, Path, BinaryIO], sig: IqSignal) -> None:
    data = to_bytes(sig)
    if hasattr(path, "write"):
        path.write(data)
    else:
        Path(path).write_bytes(data)


def read(path: Union[str, Path, BinaryIO]) -> IqSignal:
    if hasattr(path, "read"):
        return from_bytes(path.read())
    return from_bytes(Path(path).read_bytes())
