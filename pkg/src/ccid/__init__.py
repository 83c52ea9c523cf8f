"""CCID: confidence-controlled image denoising workbench.

Fuses two denoised versions of the same image in the frequency domain: a
reliable low-pass filtered image that cannot hallucinate content, and the
output of a deep denoiser that is sharp but may invent detail. The blend is
steered by a user-controlled weight and, optionally, by a per-region
confidence map.
"""

__version__ = "0.1.0"

from .image import ImagePlane, ImageFormatError, load_image, save_image, avg_pool8
from .noise import NoiseSpec, add_awgn, add_poisson, apply_noise
from .metrics import MetricReport, psnr, ssim, compare, compare_8bit
from .transforms import DctSpectrum, WaveletPyramid, TileGrid, dct2, idct2, dwt2, idwt2, tile8, stitch8
from .denoisers import DenoiserSpec, ExternalDenoiserError, gaussian_filter, apply_denoiser, run_deep_denoiser
from .confidence import (
    ConfidenceMap,
    ConfidenceModel,
    ground_truth_confidence,
    region_features,
    fit_confidence_model,
    predict_confidence,
    render_overlay,
    save_confidence,
    load_confidence,
)
from .fusion import (
    FusionParams,
    FusionMask,
    dct_fusion_mask,
    fuse,
    fuse_dct,
    fuse_dwt,
    fuse_dwt_tiled,
    fuse_dwt_confidence,
    region_weight,
)

__all__ = [
    "ImagePlane",
    "ImageFormatError",
    "load_image",
    "save_image",
    "avg_pool8",
    "NoiseSpec",
    "add_awgn",
    "add_poisson",
    "apply_noise",
    "MetricReport",
    "psnr",
    "ssim",
    "compare",
    "compare_8bit",
    "DctSpectrum",
    "WaveletPyramid",
    "TileGrid",
    "dct2",
    "idct2",
    "dwt2",
    "idwt2",
    "tile8",
    "stitch8",
    "DenoiserSpec",
    "ExternalDenoiserError",
    "gaussian_filter",
    "apply_denoiser",
    "run_deep_denoiser",
    "ConfidenceMap",
    "ConfidenceModel",
    "ground_truth_confidence",
    "region_features",
    "fit_confidence_model",
    "predict_confidence",
    "render_overlay",
    "save_confidence",
    "load_confidence",
    "FusionParams",
    "FusionMask",
    "dct_fusion_mask",
    "fuse",
    "fuse_dct",
    "fuse_dwt",
    "fuse_dwt_tiled",
    "fuse_dwt_confidence",
    "region_weight",
]
