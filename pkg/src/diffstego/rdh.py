"""Reversible data hiding by prediction-error histogram shifting.

Embedding works on the error map of a container image: errors in (0, a)
shift right by one (a = first zero-frequency bin right of 0), emptying
bin 1; payload bits then go to zero-error non-center pixels, 0 staying 0
and 1 becoming 1.  Because bin 1 held nothing after the shift, extraction
is unambiguous and the whole construction inverts bit-exactly.

Two position-selection strategies cover the two schemes: ``sequential``
uses every eligible position in raster order, ``cdjb`` selects one
position per disjoint window of five via the keyed jump schedule, so each
payload bit costs five eligible positions.

The image-level helpers add the self-describing side information a
receiver needs (zero bin, saturated-pixel location map, payload length)
as a header at the front of the embedded stream; the map-level operations
below stay side-information-free, with the zero bin travelling inside the
PredictionErrorMap value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bitstream
from .chaos import RealKey, iter_jump_positions, jump_positions
from .errors import CapacityError, MalformedStegoError, NoZeroBinError, SteganoError
from .images import (
    BlockPartition,
    PixelGrid,
    PredictionErrorMap,
    partition,
    predict_errors,
    reconstruct_pixels,
)

SEQUENTIAL = "sequential"
CDJB = "cdjb"

# embedded-stream header: zero bin (8) + saturated count (16) + 32 bits per
# saturated pixel + payload bit length (32)
_ZERO_BIN_BITS = 8
_SAT_COUNT_BITS = 16
_SAT_INDEX_BITS = 32
_LENGTH_BITS = 32


@dataclass(frozen=True)
class PositionPlan:
    """Which eligible (zero-error, non-center) positions carry payload bits.

    ``eligible`` holds flat raster indices into the grid; ``selected`` is the
    subsequence carrying bits, as indices *into the eligible list*.
    """

    mode: str
    eligible: np.ndarray
    selected: np.ndarray

    @property
    def window_size(self) -> int:
        return 1 if self.mode == SEQUENTIAL else 5

    @property
    def capacity(self) -> int:
        return len(self.selected)

    def __post_init__(self):
        for name in ("eligible", "selected"):
            a = getattr(self, name)
            if a.flags.writeable:
                a = a.copy()
                a.flags.writeable = False
                object.__setattr__(self, name, a)


def eligible_positions(pem: PredictionErrorMap) -> np.ndarray:
    """Flat raster indices of non-center block pixels with error 0."""
    mask = pem.part.data_mask() & (pem.errors == 0)
    return np.flatnonzero(mask.reshape(-1))


def capacity(pem: PredictionErrorMap, mode: str = SEQUENTIAL) -> int:
    """Payload bits the map can carry: all eligible positions, or one per
    five-position window under the keyed jump strategy."""
    n = len(eligible_positions(pem))
    if mode == SEQUENTIAL:
        return n
    if mode == CDJB:
        return n // 5
    raise ValueError(f"unknown mode {mode!r}")


def required_positions(bit_count: int, mode: str) -> int:
    """Eligible positions consumed to carry bit_count payload bits."""
    return bit_count if mode == SEQUENTIAL else 5 * bit_count


def make_plan(
    pem: PredictionErrorMap,
    mode: str = SEQUENTIAL,
    key: RealKey | None = None,
    bit_count: int | None = None,
) -> PositionPlan:
    eligible = eligible_positions(pem)
    if mode == SEQUENTIAL:
        n = len(eligible) if bit_count is None else bit_count
        if n > len(eligible):
            raise CapacityError(n, len(eligible))
        selected = np.arange(n, dtype=np.int64)
    elif mode == CDJB:
        if key is None:
            raise SteganoError("cdjb mode requires a real key")
        n = len(eligible) // 5 if bit_count is None else bit_count
        if 5 * n > len(eligible):
            raise CapacityError(5 * n, len(eligible))
        # jump positions are 1-based indices into the eligible list
        selected = np.array(jump_positions(key, n), dtype=np.int64) - 1
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PositionPlan(mode=mode, eligible=eligible, selected=selected)


def shift_histogram(pem: PredictionErrorMap) -> PredictionErrorMap:
    """Move errors in (0, a) right by one, emptying bin 1.

    The returned map keeps the pre-shift zero bin ``a`` so that the inverse
    transform knows its range.  Applying the value map e -> e+1 to all
    affected pixels at once is equivalent to the bin-by-bin right-to-left
    cascade.
    """
    a = pem.zero_bin
    if a is None:
        raise NoZeroBinError()
    errors = np.asarray(pem.errors).copy()
    mask = pem.part.data_mask() & (errors > 0) & (errors < a)
    errors[mask] += 1
    return pem.with_errors(errors)


def unshift_histogram(pem: PredictionErrorMap, zero_bin: int | None = None) -> PredictionErrorMap:
    """Inverse shift: errors in [2, a] move back left by one.

    ``zero_bin`` is the transmitted a when the map was rebuilt from stego
    pixels (its own recomputed zero_bin is not the original).  All payload
    bits must already be extracted (no data ones left in bin 1).
    """
    a = pem.zero_bin if zero_bin is None else zero_bin
    if a is None:
        raise NoZeroBinError()
    errors = np.asarray(pem.errors).copy()
    mask = pem.part.data_mask() & (errors >= 2) & (errors <= a)
    errors[mask] -= 1
    return pem.with_errors(errors, zero_bin=a)


def embed(pem: PredictionErrorMap, payload: np.ndarray, plan: PositionPlan) -> PredictionErrorMap:
    """Write payload bits at the plan's selected positions (map already shifted)."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.size > plan.capacity:
        raise CapacityError(payload.size, plan.capacity)
    errors = np.asarray(pem.errors).copy()
    flat = errors.reshape(-1)
    targets = plan.eligible[plan.selected[: payload.size]]
    if not np.all(flat[targets] == 0):
        raise SteganoError("plan does not match map: selected position has nonzero error")
    flat[targets] += payload
    return pem.with_errors(errors)


def extract(pem: PredictionErrorMap, plan: PositionPlan) -> tuple[np.ndarray, PredictionErrorMap]:
    """Read bits back from the selected positions and zero them.

    Returns (payload, cleaned map).  A selected position holding anything
    but 0 or 1 means the stego object was not produced by ``embed``.
    """
    errors = np.asarray(pem.errors).copy()
    flat = errors.reshape(-1)
    targets = plan.eligible[plan.selected]
    vals = flat[targets]
    if vals.size and not np.all((vals == 0) | (vals == 1)):
        raise MalformedStegoError("selected position holds an error value outside {0, 1}")
    flat[targets] = 0
    return vals.astype(np.uint8), pem.with_errors(errors)


def flatten_saturated(grid: PixelGrid) -> tuple[PixelGrid, np.ndarray]:
    """Pre-flatten 255-valued non-center block pixels to 254.

    Only those pixels can be pushed to 256 by a +1 shift/embed; centers and
    residual pixels are never modified.  Returns the flattened grid and the
    flat raster indices of the changed pixels (the location map).
    """
    try:
        part = partition(grid)
    except SteganoError:
        return grid, np.zeros(0, dtype=np.int64)
    mask = part.data_mask() & (grid.array == 255)
    saturated = np.flatnonzero(mask.reshape(-1))
    if saturated.size == 0:
        return grid, saturated
    a = grid.array.copy()
    a.reshape(-1)[saturated] = 254
    return PixelGrid(a), saturated


def unflatten_saturated(grid: PixelGrid, saturated: np.ndarray) -> PixelGrid:
    if len(saturated) == 0:
        return grid
    a = grid.array.copy()
    flat = a.reshape(-1)
    if not np.all(flat[saturated] == 254):
        raise MalformedStegoError("location map points at a pixel that is not 254")
    flat[saturated] = 255
    return PixelGrid(a)


def _header_bits(zero_bin: int, saturated: np.ndarray, payload_len: int) -> np.ndarray:
    parts = [
        bitstream.bits_from_int(zero_bin, _ZERO_BIN_BITS),
        bitstream.bits_from_int(len(saturated), _SAT_COUNT_BITS),
    ]
    parts.extend(bitstream.bits_from_int(int(i), _SAT_INDEX_BITS) for i in saturated)
    parts.append(bitstream.bits_from_int(payload_len, _LENGTH_BITS))
    return np.concatenate(parts)


def header_overhead_bits(saturated_count: int) -> int:
    return _ZERO_BIN_BITS + _SAT_COUNT_BITS + _SAT_INDEX_BITS * saturated_count + _LENGTH_BITS


def image_capacity(grid: PixelGrid, mode: str = SEQUENTIAL) -> dict:
    """Capacity report for a self-describing stego image.

    ``gross`` is the map-level capacity in payload bits, ``net`` what
    remains for caller payload after the in-stream header.
    """
    work, saturated = flatten_saturated(grid)
    part = partition(work)
    pem = predict_errors(work, part)
    eligible = len(eligible_positions(pem))
    gross = capacity(pem, mode)
    overhead = header_overhead_bits(len(saturated))
    return {
        "mode": mode,
        "eligible": eligible,
        "gross": gross,
        "overhead": overhead,
        "net": max(0, gross - overhead),
        "saturated": int(len(saturated)),
        "zero_bin": pem.zero_bin,
    }


def embed_in_image(
    grid: PixelGrid,
    payload: np.ndarray,
    mode: str = SEQUENTIAL,
    key: RealKey | None = None,
) -> PixelGrid:
    """Full pixel-domain embedding: flatten, shift, header + payload, rebuild.

    The stego image is self-describing: the receiver recovers everything
    from the pixels (plus the key in cdjb mode).
    """
    payload = np.asarray(payload, dtype=np.uint8)
    work, saturated = flatten_saturated(grid)
    part = partition(work)
    pem = predict_errors(work, part)
    if pem.zero_bin is None:
        raise NoZeroBinError()
    stream = np.concatenate([_header_bits(pem.zero_bin, saturated, payload.size), payload])
    avail = capacity(pem, mode)
    if stream.size > avail:
        raise CapacityError(
            stream.size,
            avail,
            f"{required_positions(stream.size, mode)} eligible positions needed, "
            f"{len(eligible_positions(pem))} present",
        )
    shifted = shift_histogram(pem)
    plan = make_plan(shifted, mode, key=key, bit_count=stream.size)
    embedded = embed(shifted, stream, plan)
    return reconstruct_pixels(embedded, part, work)


class _StreamReader:
    """Incremental bit reader over the stego error map's eligible positions."""

    def __init__(self, pem: PredictionErrorMap, mode: str, key: RealKey | None):
        self.flat = np.asarray(pem.errors).copy().reshape(-1)
        self.eligible = eligible_positions_stego(pem)
        self.mode = mode
        if mode == CDJB:
            if key is None:
                raise SteganoError("cdjb mode requires a real key")
            self._jumps = iter_jump_positions(key)
        self._cursor = 0

    def read(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.uint8)
        for i in range(count):
            if self.mode == SEQUENTIAL:
                idx = self._cursor
                self._cursor += 1
            else:
                idx = next(self._jumps) - 1
            if idx >= len(self.eligible):
                raise MalformedStegoError("embedded stream exhausted the eligible positions")
            pos = self.eligible[idx]
            v = self.flat[pos]
            if v not in (0, 1):
                raise MalformedStegoError("selected position holds an error value outside {0, 1}")
            out[i] = v
            self.flat[pos] = 0
        return out

    def read_int(self, width: int) -> int:
        return bitstream.int_from_bits(self.read(width))


def eligible_positions_stego(pem: PredictionErrorMap) -> np.ndarray:
    """Eligible list as the receiver sees it: errors 0 *or 1* at non-center
    positions.  After shifting emptied bin 1, every 1 is a payload bit on a
    formerly-zero position, so this reproduces the sender's eligible list."""
    mask = pem.part.data_mask() & ((pem.errors == 0) | (pem.errors == 1))
    return np.flatnonzero(mask.reshape(-1))


def extract_from_image(
    stego: PixelGrid,
    mode: str = SEQUENTIAL,
    key: RealKey | None = None,
) -> tuple[np.ndarray, PixelGrid]:
    """Inverse of embed_in_image: returns (payload bits, recovered cover)."""
    part = partition(stego)
    pem = predict_errors(stego, part)
    reader = _StreamReader(pem, mode, key)
    zero_bin = reader.read_int(_ZERO_BIN_BITS)
    if not 1 <= zero_bin <= 255:
        raise MalformedStegoError(f"zero bin {zero_bin} outside [1, 255]")
    sat_count = reader.read_int(_SAT_COUNT_BITS)
    n_pixels = stego.height * stego.width
    saturated = np.empty(sat_count, dtype=np.int64)
    for i in range(sat_count):
        idx = reader.read_int(_SAT_INDEX_BITS)
        if idx >= n_pixels:
            raise MalformedStegoError("location map index outside the image")
        saturated[i] = idx
    payload_len = reader.read_int(_LENGTH_BITS)
    limit = len(reader.eligible) // 5 if mode == CDJB else len(reader.eligible)
    if payload_len + header_overhead_bits(sat_count) > limit:
        raise MalformedStegoError(f"declared payload length {payload_len} exceeds capacity")
    payload = reader.read(payload_len)
    # a well-formed stego object carries data ones only at stream positions:
    # shifting emptied bin 1 and embedding wrote the stream positions alone,
    # so any 1 left after reading proves the object was modified
    leftover = reader.flat.reshape(pem.errors.shape)
    if np.any(leftover[part.data_mask()] == 1):
        raise MalformedStegoError("stray data bit outside the declared stream")
    cleaned = pem.with_errors(leftover)
    restored = unshift_histogram(cleaned, zero_bin=zero_bin)
    work = reconstruct_pixels(restored, part, stego)
    return payload, unflatten_saturated(work, saturated)
