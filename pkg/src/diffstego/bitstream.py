"""Bit-level packing helpers.

Payloads travel as numpy uint8 arrays of 0/1 values.  Bytes serialize
MSB-first; fixed-width integers serialize as big-endian bit fields.
"""

from __future__ import annotations

import numpy as np

from .errors import MalformedStegoError


def bits_from_bytes(data: bytes) -> np.ndarray:
    if not data:
        return np.zeros(0, dtype=np.uint8)
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bytes_from_bits(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise MalformedStegoError(f"bit count {bits.size} is not a whole number of bytes")
    return np.packbits(bits).tobytes()


def bits_from_int(value: int, width: int) -> np.ndarray:
    if value < 0 or value >= (1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def int_from_bits(bits: np.ndarray) -> int:
    out = 0
    for b in np.asarray(bits, dtype=np.uint8):
        out = (out << 1) | int(b)
    return out


def random_bits(count: int, rng) -> np.ndarray:
    return rng.integers(0, 2, size=count, dtype=np.uint8)
