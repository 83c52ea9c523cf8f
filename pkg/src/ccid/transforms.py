"""Orthonormal 2-D transforms: DCT-II, multi-level DWT, and 8x8 tiling.

Both transforms are scaled so that energy is preserved (Parseval holds),
which lets the fusion engines compare and blend coefficients directly.

The DWT is a periodized orthogonal filter bank (haar or db2). Periodization
wraps the signal circularly, so band dimensions halve exactly per level on
even lengths; an odd length at any level is extended by repeating its last
sample before filtering and the extension is dropped on reconstruction.
All filtering steps are vectorized over leading array axes so that stacks
of 8x8 tiles transform in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft

from .image import ImagePlane

TILE = 8

_SQRT3 = math.sqrt(3.0)
_DENOM = 4.0 * math.sqrt(2.0)

# Orthonormal scaling (low-pass) filters; the matching high-pass filter is
# the quadrature mirror g[k] = (-1)^k * h[L-1-k].
_DEC_LO = {
    "haar": np.array([1.0, 1.0]) / math.sqrt(2.0),
    "db2": np.array(
        [(1.0 + _SQRT3) / _DENOM, (3.0 + _SQRT3) / _DENOM,
         (3.0 - _SQRT3) / _DENOM, (1.0 - _SQRT3) / _DENOM]
    ),
}

WAVELETS = tuple(_DEC_LO)


def _filters(wavelet: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        lo = _DEC_LO[wavelet]
    except KeyError:
        raise ValueError(f"unknown wavelet {wavelet!r}, expected one of {WAVELETS}") from None
    hi = (lo[::-1] * np.where(np.arange(len(lo)) % 2 == 0, 1.0, -1.0)).copy()
    return lo, hi


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, order="C")
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# DCT
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DctSpectrum:
    """Orthonormal 2-D DCT-II coefficients, same layout as the image."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _freeze(self.coeffs))

    @property
    def height(self) -> int:
        return self.coeffs.shape[0]

    @property
    def width(self) -> int:
        return self.coeffs.shape[1]


def dct2(img: ImagePlane) -> DctSpectrum:
    """Separable orthonormal DCT-II (rows then columns).

    Coefficient (0, 0) equals mean(img) * sqrt(width * height).
    """
    return DctSpectrum(_fft.dctn(img.pixels, type=2, norm="ortho"))


def idct2(spec: DctSpectrum) -> ImagePlane:
    """Exact inverse of dct2."""
    return ImagePlane(_fft.idctn(spec.coeffs, type=2, norm="ortho"))


# ---------------------------------------------------------------------------
# DWT
# ---------------------------------------------------------------------------

def _analyze_axis(x: np.ndarray, lo: np.ndarray, hi: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """One periodized analysis step along axis; returns (approx, detail)."""
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    if n % 2 == 1:
        x = np.concatenate([x, x[..., -1:]], axis=-1)
        n += 1
    taps = len(lo)
    ext = np.concatenate([x, x[..., : taps - 2]], axis=-1) if taps > 2 else x
    half = n // 2
    a = np.zeros(x.shape[:-1] + (half,), dtype=np.float64)
    d = np.zeros_like(a)
    for k in range(taps):
        window = ext[..., k : k + n : 2]
        a += lo[k] * window
        d += hi[k] * window
    return np.moveaxis(a, -1, axis), np.moveaxis(d, -1, axis)


def _synthesize_axis(
    a: np.ndarray, d: np.ndarray, lo: np.ndarray, hi: np.ndarray, axis: int, out_len: int
) -> np.ndarray:
    """Transpose of _analyze_axis; out_len crops the odd-length extension."""
    a = np.moveaxis(a, axis, -1)
    d = np.moveaxis(d, axis, -1)
    taps = len(lo)
    n = 2 * a.shape[-1]
    ext = np.zeros(a.shape[:-1] + (n + taps - 2,), dtype=np.float64)
    for k in range(taps):
        ext[..., k : k + n : 2] += lo[k] * a + hi[k] * d
    out = ext[..., :n]
    if taps > 2:
        out[..., : taps - 2] += ext[..., n:]
    return np.moveaxis(out[..., :out_len], -1, axis)


def _band_shapes(height: int, width: int, levels: int) -> list[tuple[int, int]]:
    """Input shape at each level, index 0 = finest (the image itself)."""
    shapes = [(height, width)]
    for _ in range(levels - 1):
        h, w = shapes[-1]
        shapes.append(((h + 1) // 2, (w + 1) // 2))
    return shapes


def dwt2_array(
    arr: np.ndarray, levels: int, wavelet: str
) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray, np.ndarray]]]:
    """Multi-level 2-D DWT on the last two axes of arr.

    Returns (approximation, details) with details ordered finest first;
    each entry is (horizontal, vertical, diagonal).
    """
    lo, hi = _filters(wavelet)
    details: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    approx = np.asarray(arr, dtype=np.float64)
    for _ in range(levels):
        row_lo, row_hi = _analyze_axis(approx, lo, hi, axis=-1)
        ll, h_band = _analyze_axis(row_lo, lo, hi, axis=-2)
        v_band, d_band = _analyze_axis(row_hi, lo, hi, axis=-2)
        details.append((h_band, v_band, d_band))
        approx = ll
    return approx, details


def idwt2_array(
    approx: np.ndarray,
    details: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
    wavelet: str,
    height: int,
    width: int,
) -> np.ndarray:
    """Inverse of dwt2_array for an original last-two-axes shape (height, width)."""
    lo, hi = _filters(wavelet)
    shapes = _band_shapes(height, width, len(details))
    out = approx
    for (h_band, v_band, d_band), (h, w) in zip(reversed(details), reversed(shapes)):
        row_lo = _synthesize_axis(out, h_band, lo, hi, axis=-2, out_len=h)
        row_hi = _synthesize_axis(v_band, d_band, lo, hi, axis=-2, out_len=h)
        out = _synthesize_axis(row_lo, row_hi, lo, hi, axis=-1, out_len=w)
    return out


@dataclass(frozen=True, eq=False)
class WaveletPyramid:
    """Multi-level DWT bands. details[0] is level 1, the finest scale."""

    wavelet: str
    levels: int
    height: int
    width: int
    approximation: np.ndarray
    details: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        object.__setattr__(self, "approximation", _freeze(self.approximation))
        object.__setattr__(
            self,
            "details",
            tuple(tuple(_freeze(b) for b in level) for level in self.details),
        )
        if self.levels != len(self.details):
            raise ValueError(f"levels={self.levels} but {len(self.details)} detail levels present")


def dwt2(img: ImagePlane, levels: int, wavelet: str = "haar") -> WaveletPyramid:
    """Standard separable multi-level decomposition with periodized boundaries."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if 2**levels > min(img.width, img.height):
        raise ValueError(
            f"{levels} levels need min dimension >= {2**levels}, got {img.width}x{img.height}"
        )
    approx, details = dwt2_array(img.pixels, levels, wavelet)
    return WaveletPyramid(
        wavelet=wavelet,
        levels=levels,
        height=img.height,
        width=img.width,
        approximation=approx,
        details=tuple(details),
    )


def idwt2(pyr: WaveletPyramid) -> ImagePlane:
    """Exact inverse of dwt2 (up to float rounding)."""
    shapes = _band_shapes(pyr.height, pyr.width, pyr.levels)
    for level, (h_band, v_band, d_band) in enumerate(pyr.details):
        h, w = shapes[level]
        expect = ((h + 1) // 2, (w + 1) // 2)
        for band in (h_band, v_band, d_band):
            if band.shape != expect:
                raise ValueError(
                    f"inconsistent pyramid: level {level + 1} band shape {band.shape}, expected {expect}"
                )
    arr = idwt2_array(
        pyr.approximation, [tuple(level) for level in pyr.details], pyr.wavelet, pyr.height, pyr.width
    )
    return ImagePlane(arr)


# ---------------------------------------------------------------------------
# 8x8 tiling
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TileGrid:
    """Row-major grid of non-overlapping 8x8 tiles."""

    grid_height: int
    grid_width: int
    tiles: tuple[ImagePlane, ...]

    def __post_init__(self):
        if len(self.tiles) != self.grid_height * self.grid_width:
            raise ValueError(
                f"{self.grid_height}x{self.grid_width} grid needs "
                f"{self.grid_height * self.grid_width} tiles, got {len(self.tiles)}"
            )
        for t in self.tiles:
            if t.shape != (TILE, TILE):
                raise ValueError(f"tiles must be {TILE}x{TILE}, got {t.shape}")


def as_tile_stack(img: ImagePlane) -> np.ndarray:
    """View the image as a (grid_h, grid_w, 8, 8) block array."""
    h, w = img.shape
    if h % TILE != 0 or w % TILE != 0:
        raise ValueError(f"tiling requires dimensions divisible by {TILE}, got {w}x{h}")
    return img.pixels.reshape(h // TILE, TILE, w // TILE, TILE).swapaxes(1, 2)


def from_tile_stack(stack: np.ndarray) -> ImagePlane:
    """Reassemble a (grid_h, grid_w, 8, 8) block array into an image."""
    gh, gw = stack.shape[:2]
    return ImagePlane(stack.swapaxes(1, 2).reshape(gh * TILE, gw * TILE))


def tile8(img: ImagePlane) -> TileGrid:
    """Lossless partition into non-overlapping 8x8 tiles."""
    stack = as_tile_stack(img)
    gh, gw = stack.shape[:2]
    tiles = tuple(ImagePlane(stack[i, j]) for i in range(gh) for j in range(gw))
    return TileGrid(grid_height=gh, grid_width=gw, tiles=tiles)


def stitch8(grid: TileGrid) -> ImagePlane:
    """Exact reassembly of tile8 output."""
    stack = np.empty((grid.grid_height, grid.grid_width, TILE, TILE), dtype=np.float64)
    for i in range(grid.grid_height):
        for j in range(grid.grid_width):
            stack[i, j] = grid.tiles[i * grid.grid_width + j].pixels
    return from_tile_stack(stack)
