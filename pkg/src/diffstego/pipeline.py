"""End-to-end hiding and revealing.

Sender: the secret image is driven to its generating noise with the
private condition, regenerated into an unrelated container image with the
public condition, and the conditions plus an integrity digest are
reversibly embedded into the container (sequentially in the without-key
scheme, at chaos-keyed jump positions in the real-key scheme).

Receiver: extraction restores the container bit-exactly and yields the
conditions; after the digest check the container is inverted with the
public condition and regenerated with the private one, recovering the
secret.  One real key serves any number of sessions, so the key-exchange
cost is a single 102-bit codeword; condition strings never travel
out-of-band.
"""

from __future__ import annotations

import time
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

from . import ddim, integrity, rdh
from .chaos import CODEWORD_BITS, RealKey
from .errors import (
    CapacityError,
    MalformedStegoError,
    PixelRangeError,
    SeparatorError,
    SteganoError,
)
from .estimators import from_selector
from .images import PixelGrid

# published 10-image comparison scenario: per-image pseudo-keys totalling
# 3568 bits of negotiated conditions vs one 102-bit real key
PSEUDO_KEY_FIG9_TOTAL_BITS = 3568
PSEUDO_KEY_FIG9_IMAGES = 10


@dataclass
class PipelineConfig:
    total_steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    sub_steps: int = 50
    backend: str = "toy:tiled"
    latent_scale: float = 0.6     # secret pixels map into [-scale, scale]
    strict: bool = True           # abort reveal on a failed integrity check

    def schedule(self) -> ddim.DiffusionSchedule:
        return ddim.build_schedule(
            self.total_steps, self.beta_start, self.beta_end, self.sub_steps
        )


@dataclass
class HideRequest:
    secret: PixelGrid
    k_pri: str
    k_pub: str
    real_key: RealKey | None = None   # present: real-key scheme; absent: without-key
    config: PipelineConfig = field(default_factory=PipelineConfig)

    @property
    def mode(self) -> str:
        return rdh.CDJB if self.real_key is not None else rdh.SEQUENTIAL


@dataclass
class RevealResult:
    secret: PixelGrid | None
    k_pri: str
    k_pub: str
    verdict: str


@dataclass
class AttackReport:
    verdict: str
    detected: bool
    recovered: PixelGrid | None = None


def _estimator(config: PipelineConfig, sched):
    est = from_selector(config.backend, sched)
    if hasattr(est, "close"):
        return est, est
    return est, nullcontext()


def make_container(req: HideRequest) -> tuple[PixelGrid, dict]:
    """Secret -> noise -> container (the two deterministic solves)."""
    sched = req.config.schedule()
    est, guard = _estimator(req.config, sched)
    with guard:
        x0 = ddim.dequantize(req.secret)
        x0 = ddim.LatentState(tensor=x0.tensor * req.config.latent_scale, step=0)
        noise = ddim.ode_invert(x0, est, req.k_pri, sched)
        cont_latent = ddim.ode_reverse(noise, est, req.k_pub, sched)
    container, clamped = ddim.quantize(cont_latent)
    return container, {"clamped": clamped}


def hide(req: HideRequest) -> PixelGrid:
    """Algorithm of the sender; returns the stego image."""
    if req.secret.height < 3 or req.secret.width < 3:
        raise SteganoError("secret image sides must be >= 3")
    container, info = make_container(req)
    payload = integrity.frame_payload(req.k_pri, req.k_pub, container)
    return rdh.embed_in_image(container, payload, req.mode, key=req.real_key)


def hide_with_report(req: HideRequest) -> tuple[PixelGrid, dict]:
    t0 = time.perf_counter()
    container, info = make_container(req)
    payload = integrity.frame_payload(req.k_pri, req.k_pub, container)
    cap = rdh.image_capacity(container, req.mode)
    stego = rdh.embed_in_image(container, payload, req.mode, key=req.real_key)
    report = {
        "mode": "real-key" if req.real_key is not None else "without-key",
        "backend": req.config.backend,
        "payload_bits": int(payload.size),
        "capacity": cap,
        "container_clamped": info["clamped"],
        "elapsed_s": round(time.perf_counter() - t0, 4),
    }
    return stego, report


def reveal(
    stego: PixelGrid,
    real_key: RealKey | None = None,
    config: PipelineConfig | None = None,
) -> RevealResult:
    """Algorithm of the receiver; mirrors hide exactly."""
    config = config or PipelineConfig()
    mode = rdh.CDJB if real_key is not None else rdh.SEQUENTIAL
    try:
        payload, container = integrity.extract_payload(stego, real_key)
    except (MalformedStegoError, PixelRangeError, SeparatorError, CapacityError):
        return RevealResult(secret=None, k_pri="", k_pub="", verdict=integrity.MALFORMED)
    digest_ok = payload.digest == integrity.container_digest(
        container, payload.k_pri, payload.k_pub
    )
    verdict = integrity.verify(stego, real_key) if digest_ok else integrity.TAMPERED
    if verdict != integrity.AUTHENTIC and config.strict:
        return RevealResult(secret=None, k_pri=payload.k_pri, k_pub=payload.k_pub, verdict=verdict)
    sched = config.schedule()
    est, guard = _estimator(config, sched)
    with guard:
        cont_latent = ddim.dequantize(container)
        noise = ddim.ode_invert(cont_latent, est, payload.k_pub, sched)
        secret_latent = ddim.ode_reverse(noise, est, payload.k_pri, sched)
    descaled = ddim.LatentState(
        tensor=np.clip(secret_latent.tensor / config.latent_scale, -1.0, 1.0), step=0
    )
    secret, _ = ddim.quantize(descaled)
    return RevealResult(secret=secret, k_pri=payload.k_pri, k_pub=payload.k_pub, verdict=verdict)


def substitution_attack(
    stego: PixelGrid,
    replacement: PixelGrid,
    real_key: RealKey | None = None,
    config: PipelineConfig | None = None,
) -> AttackReport:
    """Simulate an adversary swapping the transmitted stego object.

    The receiver runs its normal procedure on the replacement; the attack
    counts as detected when the verdict is anything but authentic."""
    if replacement.array.shape != stego.array.shape:
        raise SteganoError("replacement must match the stego object's dimensions")
    config = config or PipelineConfig()
    result = reveal(replacement, real_key, config)
    return AttackReport(
        verdict=result.verdict,
        detected=result.verdict != integrity.AUTHENTIC,
        recovered=result.secret,
    )


def psnr(a: PixelGrid, b: PixelGrid) -> float:
    """Peak signal-to-noise ratio in dB between two grids."""
    diff = a.array.astype(np.float64) - b.array.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(255.0**2 / mse)


@dataclass
class SessionLedger:
    """Key-exchange accounting across a communication session.

    The real-key scheme negotiates one fixed-length codeword no matter how
    many images flow; a pseudo-key scheme transmits fresh extraction
    conditions per image."""

    negotiations: int = 0
    images: int = 0

    def negotiate(self) -> int:
        self.negotiations += 1
        return CODEWORD_BITS

    def record_hide(self) -> None:
        self.images += 1

    @property
    def key_exchange_bits(self) -> int:
        return CODEWORD_BITS * self.negotiations

    def report(self, pseudo_key_baseline_bits: int | None = None) -> dict:
        baseline = pseudo_key_baseline_bits
        if baseline is None and self.images == PSEUDO_KEY_FIG9_IMAGES:
            baseline = PSEUDO_KEY_FIG9_TOTAL_BITS
        return {
            "images": self.images,
            "negotiations": self.negotiations,
            "key_exchange_bits": self.key_exchange_bits,
            "pseudo_key_baseline_bits": baseline,
        }
