"""Fusion engines: DCT mask fusion, DWT band fusion, confidence-guided tiles.

All three engines blend a deep-denoiser output with a reliable filtered
image under a single user weight w in [0,1]. w=0 returns the reliable
image and w=1 the deep image, exactly; in between, low frequencies of the
deep image are adopted before high ones, so detail arrives gradually as
the user raises w.

The mask law: s = a * (1 / (1 - w + eps) - 1) and M = exp(-(fx^2 + fy^2)
/ (2s)) over frequencies normalized to [0,1] per axis. Raw integer
frequency indices would make the mask collapse to a delta at DC for any
realistic image size with the stock scale a=0.1; normalizing each axis by
its highest index keeps the published scale meaningful. This is the most
consequential interpretation in the package, called out in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .confidence import ConfidenceMap
from .image import ImagePlane, require_same_shape
from .transforms import (
    TILE,
    WAVELETS,
    DctSpectrum,
    as_tile_stack,
    dct2,
    dwt2_array,
    from_tile_stack,
    idct2,
    idwt2_array,
)

MODES = ("dct", "dwt_global", "dwt_confidence")
SCHEDULES = ("uniform", "low_first")

DEFAULT_MASK_SCALE = 0.1
DEFAULT_EPS = 1e-3
DEFAULT_THRESHOLD = 0.8

_TILE_LEVELS = 3
_FULL_LEVELS = 4
_MIN_S = 1e-12


@dataclass(frozen=True)
class FusionParams:
    """Knobs shared by every fusion engine.

    levels=None picks the default decomposition depth: 3 for 8x8 tiles,
    and for full-image DWT the largest depth up to 4 the image admits.
    """

    w: float
    a: float = DEFAULT_MASK_SCALE
    eps: float = DEFAULT_EPS
    t: float = DEFAULT_THRESHOLD
    mode: str = "dct"
    dwt_schedule: str = "low_first"
    wavelet: str = "haar"
    levels: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"fusion weight must be in [0,1], got {self.w}")
        if not self.a > 0:
            raise ValueError(f"mask scale must be > 0, got {self.a}")
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if not 0.0 < self.t < 1.0:
            raise ValueError(f"confidence threshold must be in (0,1), got {self.t}")
        if self.mode not in MODES:
            raise ValueError(f"unknown fusion mode {self.mode!r}, expected one of {MODES}")
        if self.dwt_schedule not in SCHEDULES:
            raise ValueError(
                f"unknown schedule {self.dwt_schedule!r}, expected one of {SCHEDULES}"
            )
        if self.wavelet not in WAVELETS:
            raise ValueError(f"unknown wavelet {self.wavelet!r}, expected one of {WAVELETS}")
        if self.levels is not None and self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")

    def with_weight(self, w: float) -> "FusionParams":
        return replace(self, w=w)


def mask_scale(w: float, a: float, eps: float) -> float:
    """s(w) from the mask law, clamped to a tiny positive floor.

    s is negative for w below eps; the clamp keeps the mask defined (it
    degenerates to passing only DC, which is the right limit).
    """
    s = a * (1.0 / (1.0 - w + eps) - 1.0)
    return max(s, _MIN_S)


@dataclass(frozen=True, eq=False)
class FusionMask:
    """Per-coefficient blend weight in [0,1], same layout as the spectrum."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, order="C")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _normalized_axis(n: int) -> np.ndarray:
    if n == 1:
        return np.zeros(1)
    return np.arange(n, dtype=np.float64) / (n - 1)


def dct_fusion_mask(width: int, height: int, params: FusionParams) -> FusionMask:
    """Gaussian low-pass mask over normalized frequencies.

    Endpoints are exact by definition: w=0 gives the all-zero mask (pure
    reliable) and w=1 the all-one mask (pure deep).
    """
    if params.w == 0.0:
        return FusionMask(np.zeros((height, width)))
    if params.w == 1.0:
        return FusionMask(np.ones((height, width)))
    s = mask_scale(params.w, params.a, params.eps)
    fy = _normalized_axis(height)[:, None]
    fx = _normalized_axis(width)[None, :]
    return FusionMask(np.exp(-(fx**2 + fy**2) / (2.0 * s)))


def fuse_dct(deep: ImagePlane, reliable: ImagePlane, params: FusionParams) -> ImagePlane:
    """Full-image DCT fusion: M * deep + (1 - M) * reliable per coefficient."""
    require_same_shape(deep, reliable)
    if params.w == 0.0:
        return ImagePlane(reliable.pixels)
    if params.w == 1.0:
        return ImagePlane(deep.pixels)
    mask = dct_fusion_mask(deep.width, deep.height, params).values
    spec = mask * dct2(deep).coeffs + (1.0 - mask) * dct2(reliable).coeffs
    return idct2(DctSpectrum(spec))


def band_ranks(levels: int) -> list[float]:
    """Frequency rank per band: approximation 0, then finest-first details.

    Detail level l of L (l=1 finest) gets rank (L - l + 1) / L, so the
    finest band sits at rank 1 and the coarsest near 1/L.
    """
    return [0.0] + [(levels - l + 1) / levels for l in range(1, levels + 1)]


def _band_weights(w_eff: np.ndarray, params: FusionParams, levels: int) -> list[np.ndarray]:
    """Per-band weights for an effective weight array (any shape).

    uniform: every band gets w. low_first: band b at rank r gets
    exp(-r^2 / (2 s(w))), matching the mask law along the rank axis, with
    the same exact endpoints at w=0 and w=1.
    """
    w_eff = np.asarray(w_eff, dtype=np.float64)
    ranks = band_ranks(levels)
    if params.dwt_schedule == "uniform":
        return [w_eff for _ in ranks]
    s = params.a * (1.0 / (1.0 - w_eff + params.eps) - 1.0)
    s = np.maximum(s, _MIN_S)
    weights = []
    for r in ranks:
        wb = np.exp(-(r * r) / (2.0 * s))
        wb = np.where(w_eff == 0.0, 0.0, wb)
        wb = np.where(w_eff == 1.0, 1.0, wb)
        weights.append(wb)
    return weights


def _default_levels(height: int, width: int) -> int:
    levels = 1
    while levels < _FULL_LEVELS and 2 ** (levels + 1) <= min(height, width):
        levels += 1
    return levels


def fuse_dwt(deep: ImagePlane, reliable: ImagePlane, params: FusionParams) -> ImagePlane:
    """Full-image DWT fusion, band by band, with the selected schedule."""
    require_same_shape(deep, reliable)
    if params.w == 0.0:
        return ImagePlane(reliable.pixels)
    if params.w == 1.0:
        return ImagePlane(deep.pixels)
    levels = params.levels if params.levels is not None else _default_levels(*deep.shape)
    if 2**levels > min(deep.shape):
        raise ValueError(f"{levels} levels too deep for {deep.width}x{deep.height}")
    approx_d, details_d = dwt2_array(deep.pixels, levels, params.wavelet)
    approx_r, details_r = dwt2_array(reliable.pixels, levels, params.wavelet)
    weights = _band_weights(np.float64(params.w), params, levels)
    approx = weights[0] * approx_d + (1.0 - weights[0]) * approx_r
    details = [
        tuple(wb * bd + (1.0 - wb) * br for bd, br in zip(level_d, level_r))
        for wb, level_d, level_r in zip(weights[1:], details_d, details_r)
    ]
    return ImagePlane(idwt2_array(approx, details, params.wavelet, deep.height, deep.width))


def region_weight(w, c, t):
    """Per-region weight w * (1 + c - t), clamped to [0,1].

    Scalar in, scalar out; also accepts arrays elementwise. Confidence at
    the threshold leaves w unchanged; above it the region leans further
    toward the deep image, below it toward the reliable one.
    """
    raw = np.clip(np.asarray(w, dtype=np.float64) * (1.0 + np.asarray(c) - t), 0.0, 1.0)
    return float(raw) if raw.ndim == 0 else raw


def _fuse_tile_stack(
    deep: ImagePlane, reliable: ImagePlane, w_region: np.ndarray, params: FusionParams
) -> ImagePlane:
    """Fuse per 8x8 tile with a per-region effective weight grid."""
    stack_d = as_tile_stack(deep)
    stack_r = as_tile_stack(reliable)
    levels = params.levels if params.levels is not None else _TILE_LEVELS
    if 2**levels > TILE:
        raise ValueError(f"{levels} levels too deep for {TILE}x{TILE} tiles")
    approx_d, details_d = dwt2_array(stack_d, levels, params.wavelet)
    approx_r, details_r = dwt2_array(stack_r, levels, params.wavelet)
    weights = [wb[..., None, None] for wb in _band_weights(w_region, params, levels)]
    approx = weights[0] * approx_d + (1.0 - weights[0]) * approx_r
    details = [
        tuple(wb * bd + (1.0 - wb) * br for bd, br in zip(level_d, level_r))
        for wb, level_d, level_r in zip(weights[1:], details_d, details_r)
    ]
    fused = idwt2_array(approx, details, params.wavelet, TILE, TILE)
    return from_tile_stack(fused)


def fuse_dwt_tiled(deep: ImagePlane, reliable: ImagePlane, params: FusionParams) -> ImagePlane:
    """Unguided patch-wise fusion: every 8x8 tile fused at the same w."""
    require_same_shape(deep, reliable)
    if params.w == 0.0:
        return ImagePlane(reliable.pixels)
    if params.w == 1.0:
        return ImagePlane(deep.pixels)
    grid = (deep.height // TILE, deep.width // TILE)
    return _fuse_tile_stack(deep, reliable, np.full(grid, params.w), params)


def fuse_dwt_confidence(
    deep: ImagePlane, reliable: ImagePlane, conf: ConfidenceMap, params: FusionParams
) -> ImagePlane:
    """Confidence-guided patch-wise fusion.

    Each 8x8 tile is fused at its own weight w * (1 + c - t): confident
    regions adopt more of the deep image, suspicious regions fall back
    toward the reliable one. The global endpoints stay exact: w=0 is the
    reliable image and w=1 the deep image regardless of confidence, so
    the user's slider always spans the full range.
    """
    require_same_shape(deep, reliable)
    if deep.height % TILE != 0 or deep.width % TILE != 0:
        raise ValueError(f"patch-wise fusion needs dimensions divisible by {TILE}")
    expected = (deep.height // TILE, deep.width // TILE)
    if conf.values.shape != expected:
        raise ValueError(
            f"confidence grid {conf.grid_width}x{conf.grid_height} does not match "
            f"image {deep.width}x{deep.height} (expected grid {expected[1]}x{expected[0]})"
        )
    if params.w == 0.0:
        return ImagePlane(reliable.pixels)
    if params.w == 1.0:
        return ImagePlane(deep.pixels)
    w_region = region_weight(params.w, conf.values, params.t)
    return _fuse_tile_stack(deep, reliable, w_region, params)


def fuse(
    deep: ImagePlane,
    reliable: ImagePlane,
    params: FusionParams,
    conf: ConfidenceMap | None = None,
) -> ImagePlane:
    """Dispatch on params.mode; dwt_confidence requires a confidence map."""
    if params.mode == "dct":
        return fuse_dct(deep, reliable, params)
    if params.mode == "dwt_global":
        return fuse_dwt(deep, reliable, params)
    if conf is None:
        raise ValueError("dwt_confidence mode needs a confidence map")
    return fuse_dwt_confidence(deep, reliable, conf, params)
