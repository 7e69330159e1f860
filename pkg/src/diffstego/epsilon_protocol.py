"""Length-prefixed stdin/stdout protocol for external noise estimators.

A backend process receives one request frame per estimator call and
answers with one response frame.  All integers are 32-bit little-endian;
tensors are float32 little-endian, C order.

    frame    = u32 payload_length, payload
    request  = "EPS1", u32 step, u32 cond_len, cond utf-8 bytes,
               u32 ndim, ndim * u32 dims, tensor data
    response = "EPS1", tensor data of the request's dims
             | "ERR!", u32 msg_len, msg utf-8 bytes

A backend that receives a malformed header answers with an error frame
and exits with code 5; EOF on stdin ends the session normally.

``golden_transcripts`` and ``run_conformance`` form the conformance suite
for backend implementations: byte-exact request/response pairs against
the all-zero reference model, a determinism replay, and the error-frame
behaviour.
"""

from __future__ import annotations

import shlex
import struct
import subprocess
from dataclasses import dataclass, field

import numpy as np

from .errors import BackendError, ProtocolError

MAGIC_REQUEST = b"EPS1"
MAGIC_ERROR = b"ERR!"
PROTOCOL_ERROR_EXIT = 5


def write_frame(stream, payload: bytes) -> None:
    stream.write(struct.pack("<I", len(payload)) + payload)
    stream.flush()


def read_frame(stream) -> bytes | None:
    """One frame from the stream; None on clean EOF at a frame boundary."""
    head = stream.read(4)
    if not head:
        return None
    if len(head) != 4:
        raise ProtocolError("truncated frame length")
    (n,) = struct.unpack("<I", head)
    payload = stream.read(n)
    if len(payload) != n:
        raise ProtocolError(f"truncated frame payload ({len(payload)} of {n} bytes)")
    return payload


def encode_request(step: int, condition: str, tensor: np.ndarray) -> bytes:
    cond = condition.encode("utf-8")
    data = np.ascontiguousarray(tensor, dtype="<f4")
    dims = data.shape
    return (
        MAGIC_REQUEST
        + struct.pack("<II", step, len(cond))
        + cond
        + struct.pack("<I", len(dims))
        + struct.pack(f"<{len(dims)}I", *dims)
        + data.tobytes()
    )


def decode_request(payload: bytes) -> tuple[int, str, np.ndarray]:
    if len(payload) < 12 or payload[:4] != MAGIC_REQUEST:
        raise ProtocolError("bad request magic")
    step, cond_len = struct.unpack_from("<II", payload, 4)
    pos = 12
    if pos + cond_len + 4 > len(payload):
        raise ProtocolError("truncated condition field")
    condition = payload[pos : pos + cond_len].decode("utf-8")
    pos += cond_len
    (ndim,) = struct.unpack_from("<I", payload, pos)
    pos += 4
    if ndim > 8 or pos + 4 * ndim > len(payload):
        raise ProtocolError("bad tensor rank")
    dims = struct.unpack_from(f"<{ndim}I", payload, pos)
    pos += 4 * ndim
    count = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    expected = 4 * count
    if len(payload) - pos != expected:
        raise ProtocolError(f"tensor data length {len(payload) - pos}, expected {expected}")
    tensor = np.frombuffer(payload, dtype="<f4", count=count, offset=pos).reshape(dims)
    return step, condition, tensor.copy()


def encode_response(tensor: np.ndarray) -> bytes:
    return MAGIC_REQUEST + np.ascontiguousarray(tensor, dtype="<f4").tobytes()


def encode_error(message: str) -> bytes:
    msg = message.encode("utf-8")
    return MAGIC_ERROR + struct.pack("<I", len(msg)) + msg


def decode_response(payload: bytes, shape: tuple[int, ...]) -> np.ndarray:
    if payload[:4] == MAGIC_ERROR:
        (n,) = struct.unpack_from("<I", payload, 4)
        raise ProtocolError(f"backend error: {payload[8 : 8 + n].decode('utf-8', 'replace')}")
    if payload[:4] != MAGIC_REQUEST:
        raise ProtocolError("bad response magic")
    count = int(np.prod(shape, dtype=np.int64))
    if len(payload) - 4 != 4 * count:
        raise ProtocolError(f"response data length {len(payload) - 4}, expected {4 * count}")
    return np.frombuffer(payload, dtype="<f4", count=count, offset=4).reshape(shape).astype(np.float64)


class ExternalEstimator:
    """Noise estimator served by a spawned backend process.

    One backend per pipeline execution; calls are strictly sequential on
    this connection.  Use as a context manager or call close().
    """

    def __init__(self, command: str | list[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        except OSError as exc:
            raise BackendError(f"cannot start backend {argv!r}: {exc}") from exc

    def __call__(self, x, t, condition):
        if self._proc.poll() is not None:
            raise BackendError(f"backend exited with code {self._proc.returncode}")
        x = np.asarray(x)
        try:
            write_frame(self._proc.stdin, encode_request(int(t), str(condition), x))
            payload = read_frame(self._proc.stdout)
        except (BrokenPipeError, OSError) as exc:
            raise BackendError(f"backend connection failed: {exc}") from exc
        if payload is None:
            raise BackendError("backend closed the stream mid-session")
        return decode_response(payload, x.shape)

    def close(self):
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def golden_transcripts() -> list[tuple[bytes, bytes]]:
    """Byte-exact request/response pairs for the all-zero reference model."""
    cases = []
    ramp = (np.arange(16, dtype=np.float32).reshape(4, 4) / 8.0) - 1.0
    cases.append((0, "", ramp))
    cases.append((999, "a butterfly", np.linspace(-1, 1, 6, dtype=np.float32).reshape(2, 3)))
    cases.append((500, "clé-日本語", np.full((1, 2, 2), 0.25, dtype=np.float32)))
    cases.append((20, "k", np.zeros((3, 5), dtype=np.float32)))
    out = []
    for step, cond, tensor in cases:
        request = encode_request(step, cond, tensor)
        response = encode_response(np.zeros_like(tensor))
        out.append((request, response))
    return out


@dataclass
class ConformanceReport:
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def run_conformance(command: str | list[str]) -> ConformanceReport:
    """Drive a backend through the golden transcripts plus determinism and
    error-frame checks.  The backend must implement the all-zero model."""
    report = ConformanceReport()
    argv = shlex.split(command) if isinstance(command, str) else list(command)

    proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
    try:
        for i, (request, expected) in enumerate(golden_transcripts()):
            write_frame(proc.stdin, request)
            got = read_frame(proc.stdout)
            if got != expected:
                report.failures.append(f"transcript {i}: response mismatch")
        # determinism: replaying the first request must give identical bytes
        request, expected = golden_transcripts()[0]
        seen = set()
        for _ in range(2):
            write_frame(proc.stdin, request)
            seen.add(read_frame(proc.stdout))
        if len(seen) != 1:
            report.failures.append("determinism: identical requests gave different bytes")
        proc.stdin.close()
        if proc.wait(timeout=10) != 0:
            report.failures.append(f"clean EOF exit code {proc.returncode}, expected 0")
    finally:
        if proc.poll() is None:
            proc.kill()

    # malformed header -> error frame, exit code 5
    proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
    try:
        write_frame(proc.stdin, b"BAD!" + bytes(16))
        got = read_frame(proc.stdout)
        if got is None or got[:4] != MAGIC_ERROR:
            report.failures.append("malformed request did not produce an error frame")
        if proc.wait(timeout=10) != PROTOCOL_ERROR_EXIT:
            report.failures.append(
                f"malformed request exit code {proc.returncode}, expected {PROTOCOL_ERROR_EXIT}"
            )
    finally:
        if proc.poll() is None:
            proc.kill()
    return report
