"""Auxiliary-payload framing and stego-object authenticity verification.

The embedded auxiliary data is ``k_pri # k_pub # digest``.  Key strings
are UTF-8 and must not contain the 0x23 separator byte; the 32-byte SM3
digest ends the frame.  A receiver first inverts the reversible embedding
(recovering the container exactly), then recomputes the digest: any change
to the stego object surfaces as a digest mismatch or as a structural
decode failure.

The digest preimage is the canonical container bytes followed by both key
strings.  Hashing the container alone leaves two single-pixel blind spots:
a flipped bit inside an embedded key survives (the digest does not cover
it), and nothing ties the embedded side information to this container.
Binding the keys into the digest and additionally requiring that the
canonical re-embedding of (recovered container, extracted stream)
reproduces the received stego object bit-exactly makes detection complete:
any modified stego object is rejected, up to a hash collision.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import rdh
from .bitstream import bits_from_bytes, bytes_from_bits
from .chaos import RealKey
from .errors import (
    MalformedStegoError,
    PixelRangeError,
    SeparatorError,
    SteganoError,
)
from .images import PixelGrid
from .sm3 import sm3

SEPARATOR = 0x23  # '#'

AUTHENTIC = "authentic"
TAMPERED = "tampered"
MALFORMED = "malformed"


def canonical_bytes(grid: PixelGrid) -> bytes:
    """Hash input: width and height as 32-bit little-endian, then raw
    row-major pixels.  Independent of any file-format encoder."""
    return struct.pack("<II", grid.width, grid.height) + grid.array.tobytes()


def container_digest(grid: PixelGrid, k_pri: str = "", k_pub: str = "") -> bytes:
    """SM3 over the canonical container bytes plus both key strings."""
    return sm3(
        canonical_bytes(grid)
        + bytes([SEPARATOR])
        + k_pri.encode("utf-8")
        + bytes([SEPARATOR])
        + k_pub.encode("utf-8")
    )


@dataclass(frozen=True)
class AuxPayload:
    """Decoded auxiliary data: condition strings plus container digest."""

    k_pri: str
    k_pub: str
    digest: bytes

    def __post_init__(self):
        if len(self.digest) != 32:
            raise MalformedStegoError(f"digest must be 32 bytes, got {len(self.digest)}")
        for name, value in (("k_pri", self.k_pri), ("k_pub", self.k_pub)):
            if "#" in value:
                raise SeparatorError(f"{name} contains the reserved '#' separator")


def serialize_payload(payload: AuxPayload) -> bytes:
    return (
        payload.k_pri.encode("utf-8")
        + bytes([SEPARATOR])
        + payload.k_pub.encode("utf-8")
        + bytes([SEPARATOR])
        + payload.digest
    )


def parse_payload(data: bytes) -> AuxPayload:
    """Inverse of serialize_payload.

    The digest may itself contain 0x23 bytes, so it parses as the fixed
    final 32 bytes rather than by splitting."""
    if len(data) < 34:
        raise MalformedStegoError(f"auxiliary payload too short ({len(data)} bytes)")
    digest = data[-32:]
    if data[-33] != SEPARATOR:
        raise MalformedStegoError("missing separator before digest")
    head = data[:-33]
    parts = head.split(bytes([SEPARATOR]))
    if len(parts) != 2:
        raise MalformedStegoError(f"expected 2 key fields, found {len(parts)}")
    try:
        k_pri = parts[0].decode("utf-8")
        k_pub = parts[1].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedStegoError("key field is not valid UTF-8") from exc
    return AuxPayload(k_pri=k_pri, k_pub=k_pub, digest=digest)


def frame_payload(k_pri: str, k_pub: str, container: PixelGrid) -> np.ndarray:
    """Bit sequence for embedding: keys, separators and binding digest.

    Bit length is 8*(|k_pri| + |k_pub| + 2) + 256 with key lengths in
    UTF-8 bytes."""
    digest = container_digest(container, k_pri, k_pub)
    payload = AuxPayload(k_pri=k_pri, k_pub=k_pub, digest=digest)
    return bits_from_bytes(serialize_payload(payload))


def extract_payload(
    stego: PixelGrid,
    key: RealKey | None = None,
) -> tuple[AuxPayload, PixelGrid]:
    """Undo the embedding and decode the auxiliary frame.

    Mode is keyed jumps when a key is given, sequential otherwise.
    Returns (payload, recovered container)."""
    mode = rdh.CDJB if key is not None else rdh.SEQUENTIAL
    bits, container = rdh.extract_from_image(stego, mode, key=key)
    if bits.size % 8:
        raise MalformedStegoError(f"payload length {bits.size} is not byte-aligned")
    return parse_payload(bytes_from_bits(bits)), container


def verify(stego: PixelGrid, key: RealKey | None = None) -> str:
    """Authenticity verdict for a stego object.

    authentic: digest matches and the stego object is the canonical
               embedding of its own recovered content.
    tampered:  decoding succeeded structurally but a check failed.
    malformed: the embedded stream does not decode at all.
    """
    mode = rdh.CDJB if key is not None else rdh.SEQUENTIAL
    try:
        bits, container = rdh.extract_from_image(stego, mode, key=key)
        if bits.size % 8:
            raise MalformedStegoError(f"payload length {bits.size} is not byte-aligned")
        payload = parse_payload(bytes_from_bits(bits))
    except (MalformedStegoError, PixelRangeError, SeparatorError):
        return MALFORMED
    except SteganoError:
        return MALFORMED
    if payload.digest != container_digest(container, payload.k_pri, payload.k_pub):
        return TAMPERED
    try:
        expected = rdh.embed_in_image(container, bits, mode, key=key)
    except SteganoError:
        return TAMPERED
    if expected != stego:
        return TAMPERED
    return AUTHENTIC
