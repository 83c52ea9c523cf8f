"""PSNR and SSIM on the [0, 255] intensity scale.

SSIM uses the common single-scale parameterization: 11x11 gaussian window
with sigma 1.5, K1=0.01, K2=0.03, dynamic range 255, weighted (biased)
covariance estimates, and the mean taken over fully-valid window positions
only (no padding contributes).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .image import ImagePlane, quantize_u8, require_same_shape

_DATA_RANGE = 255.0
_K1 = 0.01
_K2 = 0.03
_WINDOW_RADIUS = 5
_WINDOW_SIGMA = 1.5


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float


def psnr(a: ImagePlane, b: ImagePlane) -> float:
    """Peak signal-to-noise ratio in dB; +inf when the images are identical."""
    require_same_shape(a, b)
    mse = float(np.mean((a.pixels - b.pixels) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(_DATA_RANGE**2 / mse))


def _window_1d() -> np.ndarray:
    x = np.arange(-_WINDOW_RADIUS, _WINDOW_RADIUS + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * _WINDOW_SIGMA**2))
    return k / k.sum()


_WIN = _window_1d()


def _local_mean(img: np.ndarray) -> np.ndarray:
    # Separable valid-mode filtering; the window is symmetric so convolution
    # and correlation coincide.
    tmp = convolve2d(img, _WIN[None, :], mode="valid")
    return convolve2d(tmp, _WIN[:, None], mode="valid")


def ssim(a: ImagePlane, b: ImagePlane) -> float:
    """Mean local SSIM over all fully-valid 11x11 window positions."""
    require_same_shape(a, b)
    side = 2 * _WINDOW_RADIUS + 1
    if min(a.shape) < side:
        raise ValueError(f"ssim requires min dimension >= {side}, got {a.shape}")

    x = a.pixels
    y = b.pixels
    mu_x = _local_mean(x)
    mu_y = _local_mean(y)
    # Biased (weighted-sum) second moments, per the reference formulation.
    var_x = _local_mean(x * x) - mu_x * mu_x
    var_y = _local_mean(y * y) - mu_y * mu_y
    cov_xy = _local_mean(x * y) - mu_x * mu_y

    c1 = (_K1 * _DATA_RANGE) ** 2
    c2 = (_K2 * _DATA_RANGE) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def compare(reference: ImagePlane, candidate: ImagePlane) -> MetricReport:
    return MetricReport(psnr_db=psnr(reference, candidate), ssim=ssim(reference, candidate))


def compare_8bit(reference: ImagePlane, candidate: ImagePlane) -> MetricReport:
    """Metrics after clamping and quantizing the candidate to 8 bits.

    This is what a viewer of the saved file would measure and is the default
    figure reported by the experiment harness.
    """
    q = ImagePlane(quantize_u8(candidate).astype(np.float64))
    return compare(reference, q)


def write_metrics_csv(path: str | os.PathLike, rows: list[tuple[str, float, float]]) -> None:
    """Write per-image metrics as CSV with header image,psnr_db,ssim."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "psnr_db", "ssim"])
        for name, p, s in rows:
            writer.writerow([name, repr(float(p)), repr(float(s))])
