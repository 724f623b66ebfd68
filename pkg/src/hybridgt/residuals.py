"""Grayscale image I/O and DC4 intra-prediction residuals.

Decoded pixels are stood in for by the original pixels, so predictions
depend only on the source image. Blocks are 4x4 and vectorized row-major.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionError,
    PGMFormatError,
    PGMMaxvalError,
    PGMTruncatedError,
)

SUB = 4     # sub-block edge
TARGET = 16  # target block edge
MEAN_MODES = ("residual", "pixel")


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image; ``pixels`` has shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise DimensionError(f"expected a non-empty 2D pixel array, got {px.shape}")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255):
                raise ValueError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        else:
            px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i >= n:
            raise PGMTruncatedError("file ends inside the header")
        if data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i:i + 1].isspace() and data[i:i + 1] != b"#":
            i += 1
        tokens.append(data[start:i])
    # exactly one whitespace byte separates maxval from the raster
    if i >= n:
        raise PGMTruncatedError("no pixel data after header")
    return tokens, i + 1


def parse_pgm(data: bytes) -> GrayImage:
    """Decode a binary (P5) PGM with maxval 255."""
    if len(data) < 2:
        raise PGMTruncatedError("file too short for a PNM magic number")
    magic = data[:2]
    if magic != b"P5":
        if magic[:1] == b"P" and magic[1:2] in b"1234567":
            raise PGMFormatError(f"unsupported PNM variant {magic.decode()}; only binary P5 is read")
        raise PGMFormatError("not a PGM file")
    tokens, offset = _pgm_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise PGMFormatError(f"malformed header fields {tokens!r}") from exc
    if width <= 0 or height <= 0:
        raise PGMFormatError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PGMMaxvalError(f"maxval {maxval} unsupported; expected 255")
    raster = data[2 + offset:]
    need = width * height
    if len(raster) < need:
        raise PGMTruncatedError(f"expected {need} pixel bytes, found {len(raster)}")
    px = np.frombuffer(raster[:need], dtype=np.uint8).reshape(height, width).copy()
    return GrayImage(px)


def load_pgm(path: str | os.PathLike) -> GrayImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def write_pgm(img: GrayImage, path: str | os.PathLike) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(img.pixels).tobytes())


def _check_origin(img: GrayImage, x: int, y: int, size: int) -> None:
    if x % SUB or y % SUB:
        raise ValueError(f"origin ({x}, {y}) is not aligned to the {SUB}-pixel grid")
    if x < 0 or y < 0 or x + size > img.width or y + size > img.height:
        raise IndexError(f"{size}x{size} block at ({x}, {y}) is outside the "
                         f"{img.width}x{img.height} image")


def dc4_predict(img: GrayImage, origin: tuple[int, int]) -> int:
    """DC prediction for the 4x4 sub-block at ``origin = (x, y)``.

    Both borders: ``(top + left + 4) // 8``, the codec's integer rounding of
    the mean; one border: ``round((sum + 2) / 4)`` with round-half-even;
    neither: 128. Eight references of 100 give 100, eight of 77 give 77, and
    a lone top row 10, 20, 30, 40 gives 26.
    """
    x, y = origin
    _check_origin(img, x, y, SUB)
    px = img.pixels
    have_top, have_left = y > 0, x > 0
    top = int(px[y - 1, x:x + SUB].sum(dtype=np.int64)) if have_top else 0
    left = int(px[y:y + SUB, x - 1].sum(dtype=np.int64)) if have_left else 0
    if have_top and have_left:
        return (top + left + 4) // 8
    if have_top or have_left:
        return round((top + left + 2) / 4)
    return 128


@dataclass(frozen=True)
class ResidualBlock:
    """A vectorized 4x4 residual and the pixel origin ``(x, y)`` of its sub-block."""

    values: np.ndarray
    origin: tuple[int, int]


class ResidualField:
    """DC4 residuals of every complete 4x4 sub-block of an image.

    ``values[by, bx]`` is the length-16 residual of the sub-block whose
    top-left pixel is ``(4 bx, 4 by)``.

    Parameters
    ----------
    img : GrayImage
    remove_mean : bool
        Subtract a local mean taken from the sub-block directly above (blocks
        in the first sub-block row are left as they are).
    mean_mode : {"residual", "pixel"}
        ``"residual"`` subtracts the mean DC4 residual of the block above;
        ``"pixel"`` subtracts ``mean(pixels above) - p``, i.e. predicts with
        the above block's pixel mean instead of ``p``.
    """

    def __init__(self, img: GrayImage, remove_mean: bool = True, mean_mode: str = "residual"):
        if mean_mode not in MEAN_MODES:
            raise ValueError(f"mean_mode must be one of {MEAN_MODES}")
        self.image = img
        self.remove_mean = remove_mean
        self.mean_mode = mean_mode
        self.rows = img.height // SUB
        self.cols = img.width // SUB
        self.values = self._compute()

    def _compute(self) -> np.ndarray:
        nby, nbx = self.rows, self.cols
        if nby == 0 or nbx == 0:
            self.prediction = np.zeros((nby, nbx), dtype=np.int64)
            return np.zeros((nby, nbx, SUB * SUB))
        px = self.image.pixels[: nby * SUB, : nbx * SUB].astype(np.int64)
        blocks = px.reshape(nby, SUB, nbx, SUB).transpose(0, 2, 1, 3).reshape(nby, nbx, SUB * SUB)

        top = np.zeros((nby, nbx), dtype=np.int64)
        left = np.zeros((nby, nbx), dtype=np.int64)
        top[1:] = px[SUB - 1:-1:SUB].reshape(nby - 1, nbx, SUB).sum(axis=2)
        left[:, 1:] = px[:, SUB - 1:-1:SUB].reshape(nby, SUB, nbx - 1).sum(axis=1)
        has_top = np.zeros((nby, nbx), dtype=bool)
        has_top[1:] = True
        has_left = np.zeros((nby, nbx), dtype=bool)
        has_left[:, 1:] = True

        pred = np.full((nby, nbx), 128, dtype=np.int64)
        both = has_top & has_left
        pred[both] = (top[both] + left[both] + 4) // 8
        one = has_top ^ has_left
        pred[one] = np.rint((top[one] + left[one] + 2) / 4)
        self.prediction = pred

        res = (blocks - pred[..., None]).astype(float)
        if self.remove_mean and nby > 1:
            if self.mean_mode == "residual":
                local = res[:-1].mean(axis=2)
            else:
                local = blocks[:-1].mean(axis=2) - pred[1:]
            res[1:] -= local[..., None]
        return res

    def block(self, x: int, y: int) -> np.ndarray:
        return self.values[y // SUB, x // SUB]

    def region(self, x0: int, y0: int, width: int, height: int) -> np.ndarray:
        """Residuals of the sub-blocks in a pixel rectangle, raster order, shape (m, 16)."""
        r = self.values[y0 // SUB:(y0 + height) // SUB, x0 // SUB:(x0 + width) // SUB]
        return r.reshape(-1, SUB * SUB)


def extract_residuals(img: GrayImage, region: tuple[int, int, int, int] | None = None,
                      remove_mean: bool = True, mean_mode: str = "residual",
                      field: ResidualField | None = None) -> list[ResidualBlock]:
    """DC4 residuals of the 4x4 sub-blocks inside ``region = (x, y, width, height)``.

    ``region`` defaults to the whole image; its origin and size must be
    multiples of 4. Blocks come back in raster order.
    """
    if region is None:
        region = (0, 0, (img.width // SUB) * SUB, (img.height // SUB) * SUB)
    x0, y0, w, h = region
    if w <= 0 or h <= 0:
        return []
    if w % SUB or h % SUB:
        raise ValueError(f"region size {w}x{h} is not a multiple of {SUB}")
    _check_origin(img, x0, y0, SUB)
    if x0 + w > img.width or y0 + h > img.height:
        raise IndexError(f"region {region} exceeds the {img.width}x{img.height} image")
    if field is None:
        field = ResidualField(img, remove_mean, mean_mode)
    out = []
    for y in range(y0, y0 + h, SUB):
        for x in range(x0, x0 + w, SUB):
            out.append(ResidualBlock(field.block(x, y).copy(), (x, y)))
    return out


@dataclass(frozen=True)
class CovarianceEstimate:
    """Second-moment matrix of ``m`` residuals.

    ``fallback`` marks a placeholder identity used when no causal neighbour
    exists; callers should not build adaptive transforms from it.
    """

    matrix: np.ndarray
    m: int
    fallback: bool = False


def _as_rows(residuals) -> np.ndarray:
    if isinstance(residuals, np.ndarray):
        return np.atleast_2d(residuals).astype(float)
    return np.array([r.values if isinstance(r, ResidualBlock) else r for r in residuals],
                    dtype=float)


def estimate_covariance(residuals: Sequence[ResidualBlock] | np.ndarray,
                        m_limit: int | None = None) -> CovarianceEstimate:
    """``(1/M) sum y y^T`` over the first ``min(m_limit, available)`` residuals.

    No mean is subtracted.
    """
    rows = _as_rows(residuals)
    if rows.size == 0 or len(rows) == 0:
        raise ValueError("cannot estimate a covariance from zero residuals")
    if m_limit is not None:
        if m_limit < 1:
            raise ValueError("m_limit must be >= 1")
        rows = rows[:m_limit]
    m = len(rows)
    c = rows.T @ rows / m
    return CovarianceEstimate(0.5 * (c + c.T), m)


def neighbor_origins(img: GrayImage, target_origin: tuple[int, int]) -> list[tuple[int, int]]:
    """Left, above and above-left 16x16 neighbours that lie inside the image."""
    x, y = target_origin
    cand = [(x - TARGET, y), (x, y - TARGET), (x - TARGET, y - TARGET)]
    return [(cx, cy) for cx, cy in cand
            if cx >= 0 and cy >= 0 and cx + TARGET <= img.width and cy + TARGET <= img.height]


def neighbor_covariance(img: GrayImage, target_origin: tuple[int, int], m: int | None = None,
                        remove_mean: bool = True, mean_mode: str = "residual",
                        field: ResidualField | None = None) -> CovarianceEstimate:
    """Covariance of residuals gathered from the causal 16x16 neighbours.

    Residuals are taken block by block (left, above, above-left), each in
    raster order, and cut to the first ``m``. A target with no neighbour
    gets a flagged identity estimate.
    """
    x, y = target_origin
    if x % TARGET or y % TARGET:
        raise ValueError(f"target origin ({x}, {y}) is not 16-aligned")
    if field is None:
        field = ResidualField(img, remove_mean, mean_mode)
    origins = neighbor_origins(img, target_origin)
    if not origins:
        return CovarianceEstimate(np.eye(SUB * SUB), 0, fallback=True)
    rows = np.concatenate([field.region(ox, oy, TARGET, TARGET) for ox, oy in origins])
    return estimate_covariance(rows, m)
