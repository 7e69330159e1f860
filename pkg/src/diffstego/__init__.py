"""Coverless image steganography toolkit.

Hides a secret image by running it through a deterministic diffusion
inversion/regeneration round trip, then reversibly embeds the extraction
conditions and an integrity digest into the generated container image.
Embedding positions are either sequential (without-key scheme) or selected
by a chaos-keyed jump schedule (real-key scheme); one 102-bit key covers
any number of sessions.

Module map:

    images       rasters, 3x3 partitioning, center-value prediction
    rdh          histogram-shift embedding/extraction, position plans
    chaos        piecewise logistic map, jump schedule, 102-bit key codec
    ddim         noise schedule, deterministic ODE solvers, quantisation
    estimators   toy noise estimators + external-backend selector
    integrity    SM3 digests, payload framing, authenticity verdicts
    pipeline     end-to-end hide/reveal, attack simulation, session ledger
    cli          command-line surface
"""

from .chaos import ChaoticSequence, RealKey, decode_key, encode_key, jump_positions
from .ddim import DiffusionSchedule, LatentState, build_schedule, dequantize, ode_invert, ode_reverse, quantize
from .errors import (
    BackendError,
    CapacityError,
    ChaosDomainError,
    DimensionError,
    InvalidKeyError,
    KeyRangeError,
    MalformedStegoError,
    NonFiniteStateError,
    NoZeroBinError,
    PixelRangeError,
    ProtocolError,
    ScheduleError,
    SeparatorError,
    SteganoError,
)
from .images import BlockPartition, PixelGrid, PredictionErrorMap, partition, predict_errors, reconstruct_pixels
from .integrity import AuxPayload, frame_payload, verify
from .pipeline import AttackReport, HideRequest, PipelineConfig, RevealResult, SessionLedger, hide, psnr, reveal, substitution_attack

__version__ = "0.1.0"
