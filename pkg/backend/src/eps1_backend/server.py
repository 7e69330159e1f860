"""Serve loop: one request frame in, one response frame out, until EOF."""

from __future__ import annotations

from .protocol import (
    PROTOCOL_ERROR_EXIT,
    ProtocolViolation,
    error_payload,
    parse_request,
    read_frame,
    response_payload,
    write_frame,
)


def serve(stdin, stdout, model) -> int:
    """Returns the process exit code: 0 on EOF, 5 after a protocol error."""
    while True:
        try:
            payload = read_frame(stdin)
        except ProtocolViolation as exc:
            write_frame(stdout, error_payload(str(exc)))
            return PROTOCOL_ERROR_EXIT
        if payload is None:
            return 0
        try:
            request = parse_request(payload)
        except ProtocolViolation as exc:
            write_frame(stdout, error_payload(str(exc)))
            return PROTOCOL_ERROR_EXIT
        try:
            data = model.evaluate(request)
        except Exception as exc:  # model failure: report and keep serving
            write_frame(stdout, error_payload(f"model error: {exc}"))
            continue
        if len(data) != 4 * request.count:
            write_frame(stdout, error_payload("model returned wrong-size tensor"))
            continue
        write_frame(stdout, response_payload(data))
