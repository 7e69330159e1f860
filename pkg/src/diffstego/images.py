"""8-bit grayscale rasters, 3x3 block partitioning and center-value prediction.

A grid is split into non-overlapping 3x3 blocks anchored at the top-left
corner; only the fully divisible region is tiled and everything outside it
(the right/bottom strips) is residual and never touched.  Within each block
the center pixel predicts its eight neighbours, giving a signed prediction
error per non-center pixel.  The error map plus the untouched centers and
residual pixels reconstruct the grid exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, PixelRangeError, SteganoError

BLOCK = 3

# raster offsets of the eight non-center pixels inside a block
_NEIGHBOR_OFFSETS = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2)]


@dataclass(frozen=True)
class PixelGrid:
    """Immutable 8-bit grayscale raster, row-major."""

    array: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.array)
        if a.ndim != 2:
            raise SteganoError(f"expected a 2-D grayscale array, got shape {a.shape}")
        if a.dtype != np.uint8:
            if not np.issubdtype(a.dtype, np.integer):
                raise SteganoError(f"pixel dtype must be integer, got {a.dtype}")
            if a.size and (a.min() < 0 or a.max() > 255):
                raise SteganoError("pixel values must lie in [0, 255]")
            a = a.astype(np.uint8)
        else:
            a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "array", a)

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def pixels(self) -> np.ndarray:
        """Row-major flat view."""
        return self.array.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, PixelGrid):
            return NotImplemented
        return self.array.shape == other.array.shape and bool(np.array_equal(self.array, other.array))

    def __hash__(self):
        return hash((self.array.shape, self.array.tobytes()))

    @classmethod
    def from_array(cls, array) -> "PixelGrid":
        return cls(np.asarray(array))

    @classmethod
    def load(cls, path) -> "PixelGrid":
        """Read an 8-bit grayscale PNG or raw PGM (P5) file."""
        path = Path(path)
        data = path.read_bytes()
        if data[:2] == b"P5":
            return cls(_parse_pgm(data))
        from PIL import Image

        with Image.open(path) as im:
            if im.mode != "L":
                raise SteganoError(
                    f"{path.name}: mode {im.mode} not supported; supply an 8-bit grayscale image "
                    "(split color images into planes first)"
                )
            return cls(np.asarray(im, dtype=np.uint8))

    def save(self, path) -> None:
        """Write PNG or PGM depending on the file suffix."""
        path = Path(path)
        if path.suffix.lower() == ".pgm":
            header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
            path.write_bytes(header + self.array.tobytes())
            return
        from PIL import Image

        Image.fromarray(self.array, mode="L").save(path, format="PNG")


def load_planes(path) -> list[PixelGrid]:
    """Load an image as grayscale planes: 1 for grayscale, 3 for RGB."""
    path = Path(path)
    if path.read_bytes()[:2] == b"P5":
        return [PixelGrid.load(path)]
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "L":
            return [PixelGrid(np.asarray(im, dtype=np.uint8))]
        if im.mode in ("RGB", "RGBA"):
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
            return [PixelGrid(arr[:, :, c]) for c in range(3)]
    raise SteganoError(f"{path.name}: unsupported image mode")


def _parse_pgm(data: bytes) -> np.ndarray:
    # header = magic, width, height, maxval as whitespace-separated tokens,
    # '#' comments allowed; raster starts one whitespace byte after maxval
    pos = 2
    fields = []
    while len(fields) < 3:
        m = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\d+)").match(data, pos)
        if not m:
            raise SteganoError("truncated PGM header")
        fields.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = fields
    if maxval != 255:
        raise SteganoError(f"only 8-bit PGM supported, maxval={maxval}")
    pos += 1  # single whitespace separator
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise SteganoError("truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


@dataclass(frozen=True)
class BlockPartition:
    """3x3 tiling of the largest divisible sub-rectangle of a grid."""

    height: int
    width: int
    block_rows: int
    block_cols: int

    @property
    def block_count(self) -> int:
        return self.block_rows * self.block_cols

    @property
    def region_height(self) -> int:
        return self.block_rows * BLOCK

    @property
    def region_width(self) -> int:
        return self.block_cols * BLOCK

    @property
    def blocks(self) -> list[tuple[int, int]]:
        """Top-left corners in raster order."""
        return [
            (r * BLOCK, c * BLOCK)
            for r in range(self.block_rows)
            for c in range(self.block_cols)
        ]

    @property
    def residual(self) -> list[tuple[int, int]]:
        """Coordinates outside every full block."""
        out = []
        for r in range(self.height):
            for c in range(self.width):
                if r >= self.region_height or c >= self.region_width:
                    out.append((r, c))
        return out

    def data_mask(self) -> np.ndarray:
        """Boolean mask of non-center block pixels (the prediction targets)."""
        return _masks(self.height, self.width, self.region_height, self.region_width)[0]

    def center_mask(self) -> np.ndarray:
        return _masks(self.height, self.width, self.region_height, self.region_width)[1]


from functools import lru_cache


@lru_cache(maxsize=32)
def _masks(height, width, region_height, region_width):
    data = np.zeros((height, width), dtype=bool)
    data[:region_height, :region_width] = True
    data[1:region_height:BLOCK, 1:region_width:BLOCK] = False
    center = np.zeros((height, width), dtype=bool)
    center[1:region_height:BLOCK, 1:region_width:BLOCK] = True
    data.flags.writeable = False
    center.flags.writeable = False
    return data, center


def partition(grid: PixelGrid) -> BlockPartition:
    """Tile the grid with non-overlapping 3x3 blocks; remainder is residual."""
    if grid.height < BLOCK or grid.width < BLOCK:
        raise DimensionError(
            f"grid {grid.width}x{grid.height} too small; both sides must be >= {BLOCK}"
        )
    return BlockPartition(
        height=grid.height,
        width=grid.width,
        block_rows=grid.height // BLOCK,
        block_cols=grid.width // BLOCK,
    )


@dataclass(frozen=True)
class PredictionErrorMap:
    """Signed center-prediction errors with histogram metadata.

    ``errors`` is full-size with zeros at centers and residual positions;
    only entries under ``partition.data_mask()`` are meaningful.  ``zero_bin``
    is the first a > 0 with histogram count 0, or None when no such bin
    exists.  The histogram covers error values -255..255 (index = value+255).
    """

    part: BlockPartition
    errors: np.ndarray          # int16, (height, width)
    centers: np.ndarray         # uint8, (block_rows, block_cols)
    histogram: np.ndarray = field(repr=False, default=None)
    zero_bin: int | None = None

    def __post_init__(self):
        for name in ("errors", "centers", "histogram"):
            a = getattr(self, name)
            if a is not None and a.flags.writeable:
                a = a.copy()
                a.flags.writeable = False
                object.__setattr__(self, name, a)

    def hist_count(self, value: int) -> int:
        return int(self.histogram[value + 255])

    def with_errors(self, errors: np.ndarray, zero_bin: int | None = None) -> "PredictionErrorMap":
        """Same partition/centers, new error values and histogram.

        The zero bin is carried over unchanged unless overridden (a stego-side
        map's recomputed bin is not the original shift bound)."""
        return PredictionErrorMap(
            part=self.part,
            errors=errors,
            centers=self.centers,
            histogram=_histogram_of(errors, self.part),
            zero_bin=self.zero_bin if zero_bin is None else zero_bin,
        )


def _histogram_of(errors: np.ndarray, part: BlockPartition) -> np.ndarray:
    vals = errors[part.data_mask()]
    return np.bincount((vals.astype(np.int32) + 255), minlength=511)


def _first_zero_bin(histogram: np.ndarray) -> int | None:
    for a in range(1, 256):
        if histogram[a + 255] == 0:
            return a
    return None


def predict_errors(grid: PixelGrid, part: BlockPartition) -> PredictionErrorMap:
    """Center-value prediction: error = pixel - center of its 3x3 block."""
    if (part.height, part.width) != (grid.height, grid.width):
        raise SteganoError("partition does not match grid dimensions")
    a = grid.array
    rh, rw = part.region_height, part.region_width
    centers = a[1:rh:BLOCK, 1:rw:BLOCK]
    predicted = np.repeat(np.repeat(centers, BLOCK, axis=0), BLOCK, axis=1)
    errors = np.zeros((grid.height, grid.width), dtype=np.int16)
    errors[:rh, :rw] = a[:rh, :rw].astype(np.int16) - predicted.astype(np.int16)
    errors[~part.data_mask()] = 0
    hist = _histogram_of(errors, part)
    return PredictionErrorMap(
        part=part,
        errors=errors,
        centers=centers.copy(),
        histogram=hist,
        zero_bin=_first_zero_bin(hist),
    )


def reconstruct_pixels(pem: PredictionErrorMap, part: BlockPartition, residual_source: PixelGrid) -> PixelGrid:
    """Inverse of predict_errors: pixel = center + error.

    Centers and residual pixels are copied from ``residual_source`` (the
    cover or stego grid; both hold them unmodified).  Raises PixelRangeError
    if any reconstructed value leaves [0, 255].
    """
    if (part.height, part.width) != (residual_source.height, residual_source.width):
        raise SteganoError("partition does not match residual source dimensions")
    rh, rw = part.region_height, part.region_width
    src_centers = residual_source.array[1:rh:BLOCK, 1:rw:BLOCK]
    if not np.array_equal(src_centers, pem.centers):
        raise SteganoError("center pixels of residual source disagree with the error map")
    predicted = np.repeat(np.repeat(pem.centers.astype(np.int32), BLOCK, axis=0), BLOCK, axis=1)
    out = residual_source.array.astype(np.int32).copy()
    mask = part.data_mask()
    region = predicted + pem.errors[:rh, :rw].astype(np.int32)
    full = out.copy()
    full[:rh, :rw] = region
    vals = full[mask]
    if vals.size and (vals.min() < 0 or vals.max() > 255):
        bad = int(np.flatnonzero((vals < 0) | (vals > 255))[0])
        raise PixelRangeError(f"reconstructed pixel out of range (eligible index {bad})")
    out[mask] = vals
    return PixelGrid(out.astype(np.uint8))
