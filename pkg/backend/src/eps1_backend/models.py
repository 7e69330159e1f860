"""Noise models served over the protocol.

Every model maps (step, condition, float32 tensor bytes, dims) to float32
tensor bytes of the same dims, deterministically.  The built-ins need no
third-party packages; the TorchScript adapter hosts a real pretrained
estimator when one is available locally.
"""

from __future__ import annotations

import hashlib
import struct

from .protocol import Request


class EchoZeroModel:
    """Predicts zero noise everywhere; the protocol reference model."""

    name = "echo-zero"

    def evaluate(self, request: Request) -> bytes:
        return b"\x00" * (4 * request.count)


class PseudoNoiseModel:
    """Deterministic pseudo-noise in [-1, 1) keyed by (step, condition, dims).

    Useful for exercising a pipeline with a non-trivial yet reproducible
    estimator when no trained model is on disk."""

    name = "pseudo"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def evaluate(self, request: Request) -> bytes:
        material = "\x1f".join(
            [str(self.seed), str(request.step), request.condition, ",".join(map(str, request.dims))]
        ).encode("utf-8")
        raw = hashlib.shake_256(material).digest(4 * request.count)
        words = struct.unpack(f"<{request.count}I", raw)
        values = [(w / 2**32) * 2.0 - 1.0 for w in words]
        return struct.pack(f"<{request.count}f", *values)


class TorchScriptModel:
    """Adapter for a scripted denoiser: module(x, t, cond_seed) -> noise.

    ``x`` arrives as a float32 tensor shaped like the request, ``t`` as an
    int64 scalar tensor and ``cond_seed`` as an int64 scalar derived from
    the condition string.  Any conditional image diffusion model exported
    with this signature will do.
    """

    def __init__(self, path: str, device: str = "cpu"):
        import torch  # deferred: only this model needs it

        self._torch = torch
        self.module = torch.jit.load(path, map_location=device).eval()
        self.device = device
        self.name = f"torchscript:{path}"

    def evaluate(self, request: Request) -> bytes:
        torch = self._torch
        x = torch.frombuffer(bytearray(request.data), dtype=torch.float32).reshape(request.dims)
        t = torch.tensor(request.step, dtype=torch.int64)
        seed = int.from_bytes(
            hashlib.sha256(request.condition.encode("utf-8")).digest()[:8], "big"
        )
        cond = torch.tensor(seed % 2**63, dtype=torch.int64)
        with torch.no_grad():
            out = self.module(x.to(self.device), t, cond)
        out = out.detach().cpu().to(torch.float32).contiguous()
        if tuple(out.shape) != request.dims:
            raise ValueError(f"model returned shape {tuple(out.shape)}, expected {request.dims}")
        return out.numpy().tobytes()


def load_model(selector: str, device: str = "cpu"):
    if selector == "echo-zero":
        return EchoZeroModel()
    if selector == "pseudo" or selector.startswith("pseudo:"):
        seed = int(selector.split(":", 1)[1]) if ":" in selector else 0
        return PseudoNoiseModel(seed=seed)
    if selector.startswith("torchscript:"):
        return TorchScriptModel(selector.split(":", 1)[1], device=device)
    raise ValueError(f"unknown model selector {selector!r}")
