"""EPS1 wire format.

    frame    = u32 payload_length (little-endian), payload
    request  = "EPS1", u32 step, u32 cond_len, cond utf-8 bytes,
               u32 ndim, ndim * u32 dims, float32 little-endian data
    response = "EPS1", float32 data of the request's dims
             | "ERR!", u32 msg_len, msg utf-8 bytes
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAGIC = b"EPS1"
MAGIC_ERROR = b"ERR!"
PROTOCOL_ERROR_EXIT = 5
MAX_RANK = 8


class ProtocolViolation(Exception):
    pass


@dataclass
class Request:
    step: int
    condition: str
    dims: tuple[int, ...]
    data: bytes  # float32 little-endian, len == 4 * prod(dims)

    @property
    def count(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n


def read_frame(stream) -> bytes | None:
    head = stream.read(4)
    if not head:
        return None
    if len(head) != 4:
        raise ProtocolViolation("truncated frame length")
    (n,) = struct.unpack("<I", head)
    payload = stream.read(n)
    if len(payload) != n:
        raise ProtocolViolation(f"truncated payload: {len(payload)} of {n} bytes")
    return payload


def write_frame(stream, payload: bytes) -> None:
    stream.write(struct.pack("<I", len(payload)) + payload)
    stream.flush()


def parse_request(payload: bytes) -> Request:
    if len(payload) < 12 or payload[:4] != MAGIC:
        raise ProtocolViolation("bad request magic")
    step, cond_len = struct.unpack_from("<II", payload, 4)
    pos = 12
    if pos + cond_len + 4 > len(payload):
        raise ProtocolViolation("truncated condition field")
    try:
        condition = payload[pos : pos + cond_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolViolation("condition is not valid UTF-8") from exc
    pos += cond_len
    (ndim,) = struct.unpack_from("<I", payload, pos)
    pos += 4
    if ndim > MAX_RANK or pos + 4 * ndim > len(payload):
        raise ProtocolViolation("bad tensor rank")
    dims = struct.unpack_from(f"<{ndim}I", payload, pos)
    pos += 4 * ndim
    count = 1
    for d in dims:
        count *= d
    if len(payload) - pos != 4 * count:
        raise ProtocolViolation(
            f"tensor data length {len(payload) - pos}, expected {4 * count}"
        )
    return Request(step=step, condition=condition, dims=tuple(dims), data=payload[pos:])


def response_payload(data: bytes) -> bytes:
    return MAGIC + data


def error_payload(message: str) -> bytes:
    msg = message.encode("utf-8")
    return MAGIC_ERROR + struct.pack("<I", len(msg)) + msg
