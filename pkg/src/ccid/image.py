"""Single-channel image planes and their file I/O.

Everything downstream works on float64 intensities on the [0, 255] scale.
Values may transiently leave that range during processing; clamping and
8-bit quantization happen only at file boundaries.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

# Rec. 601 luma weights used to collapse color inputs to one channel.
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# PIL modes we can ingest. Anything else (16-bit ints, floats, CMYK, ...)
# is rejected rather than silently rescaled.
_GRAY_MODES = {"L", "LA", "1"}
_COLOR_MODES = {"RGB", "RGBA", "P"}


class ImageFormatError(ValueError):
    """A file is unreadable as an image or has an unsupported bit depth."""


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """Immutable single-channel raster, float64, row-major.

    The wrapped array is made read-only so planes can be shared across
    threads and cached without defensive copies.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not (
            isinstance(px, np.ndarray)
            and px.dtype == np.float64
            and px.flags.c_contiguous
            and not px.flags.writeable
        ):
            px = np.array(px, dtype=np.float64, order="C")
            px.flags.writeable = False
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"image data must be a non-empty 2-D array, got shape {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __repr__(self) -> str:
        return f"ImagePlane({self.width}x{self.height})"


def plane_from(array: np.ndarray) -> ImagePlane:
    """Wrap an array as an ImagePlane (copying unless already frozen float64)."""
    return ImagePlane(array)


def require_same_shape(a: ImagePlane, b: ImagePlane, what: str = "images") -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} must have equal dimensions, got {a.shape} vs {b.shape}")


def require_min_size(img: ImagePlane, minimum: int = 8) -> None:
    """Pipeline entry points require at least an 8x8 image."""
    if img.width < minimum or img.height < minimum:
        raise ValueError(
            f"image must be at least {minimum}x{minimum}, got {img.width}x{img.height}"
        )


def _decode(source, origin: str) -> ImagePlane:
    try:
        with Image.open(source) as im:
            mode = im.mode
            if mode in _GRAY_MODES:
                gray = im.convert("L") if mode != "L" else im
                arr = np.asarray(gray, dtype=np.float64)
            elif mode in _COLOR_MODES:
                rgb = im.convert("RGB")
                raw = np.asarray(rgb, dtype=np.float64)
                r, g, b = _LUMA_WEIGHTS
                arr = r * raw[:, :, 0] + g * raw[:, :, 1] + b * raw[:, :, 2]
            else:
                raise ImageFormatError(
                    f"unsupported image mode {mode!r} in {origin}; "
                    "expected 8-bit grayscale or color (PNG/PGM)"
                )
    except (OSError, UnidentifiedImageError) as exc:
        raise ImageFormatError(f"cannot read {origin} as an image: {exc}") from exc
    return ImagePlane(arr)


def load_image(path: str | os.PathLike) -> ImagePlane:
    """Load an 8-bit grayscale PNG or PGM as an ImagePlane.

    Color inputs are converted to luma with Rec. 601 weights, kept in float
    (no re-quantization). 16-bit or float inputs raise ImageFormatError.
    """
    return _decode(path, str(path))


def decode_image(data: bytes, origin: str = "upload") -> ImagePlane:
    """Decode in-memory PNG/PGM bytes with the same rules as load_image."""
    return _decode(io.BytesIO(data), origin)


def quantize_u8(img: ImagePlane) -> np.ndarray:
    """Clamp to [0, 255] and round half-away-from-zero to uint8.

    After clamping all values are non-negative, so half-away-from-zero
    reduces to floor(x + 0.5). The rule is fixed so that file output is
    bit-exact across platforms.
    """
    clipped = np.clip(img.pixels, 0.0, 255.0)
    return np.floor(clipped + 0.5).clip(0, 255).astype(np.uint8)


def save_image(img: ImagePlane, path: str | os.PathLike) -> None:
    """Write an ImagePlane as an 8-bit grayscale file (PNG or binary PGM).

    The container format follows the file extension.
    """
    out = Image.fromarray(quantize_u8(img), mode="L")
    out.save(path)


def pad_to_multiple8(img: ImagePlane) -> ImagePlane:
    """Reflect-pad on the bottom/right to the next multiple of 8.

    Reflection repeats the edge sample (numpy's 'symmetric'), matching the
    boundary convention of the separable filters in this package. No-op when
    both dimensions already divide by 8.
    """
    pad_h = (-img.height) % 8
    pad_w = (-img.width) % 8
    if pad_h == 0 and pad_w == 0:
        return img
    padded = np.pad(img.pixels, ((0, pad_h), (0, pad_w)), mode="symmetric")
    return ImagePlane(padded)


def crop(img: ImagePlane, height: int, width: int) -> ImagePlane:
    """Crop to the top-left height x width region (undo pad_to_multiple8)."""
    if height > img.height or width > img.width:
        raise ValueError(f"cannot crop {img.shape} to {(height, width)}")
    if (height, width) == img.shape:
        return img
    return ImagePlane(img.pixels[:height, :width])


def avg_pool8(img: ImagePlane) -> ImagePlane:
    """Downsample by 8 with average pooling over non-overlapping 8x8 blocks.

    Requires dimensions divisible by 8; callers pad beforehand.
    """
    h, w = img.shape
    if h % 8 != 0 or w % 8 != 0:
        raise ValueError(f"avg_pool8 requires dimensions divisible by 8, got {w}x{h}")
    pooled = img.pixels.reshape(h // 8, 8, w // 8, 8).mean(axis=(1, 3))
    return ImagePlane(pooled)
