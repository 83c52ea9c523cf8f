"""Per-region confidence: ground-truth oracle, linear surrogate, overlay.

Confidence lives on an 8x smaller grid than the image: one value in [0,1]
per 8x8 region. The oracle needs the ground truth; without it, a small
ridge-regression surrogate predicts confidence from region statistics of
the noisy input, the filtered image, and the deep noise map. Maps can
also be loaded from plain-text CMAP files produced elsewhere.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image import ImagePlane, avg_pool8, require_same_shape
from .noise import SIGMA_MAX
from .transforms import dwt2_array

FEATURE_COUNT = 5
_RIDGE_LAMBDA = 1e-3

CMAP_MAGIC = "CMAP"


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ConfidenceMap:
    """Row-major grid of per-region confidence values in [0,1]."""

    values: np.ndarray

    def __post_init__(self):
        vals = _freeze(self.values)
        if vals.ndim != 2 or vals.size == 0:
            raise ValueError(f"confidence grid must be 2-D and non-empty, got shape {vals.shape}")
        if np.any(vals < 0.0) or np.any(vals > 1.0) or not np.all(np.isfinite(vals)):
            raise ValueError("confidence values must lie in [0,1]")
        object.__setattr__(self, "values", vals)

    @property
    def grid_height(self) -> int:
        return self.values.shape[0]

    @property
    def grid_width(self) -> int:
        return self.values.shape[1]


def ground_truth_confidence(y_gt: ImagePlane, y_dnn: ImagePlane) -> ConfidenceMap:
    """c = 1 - avg_pool8(|y_gt - y_dnn|) / 100, clamped to [0,1].

    The absolute error is averaged per 8x8 region and mapped through the
    maximum handled noise level (100), so zero error gives confidence 1
    and a mean error of 100 or more gives 0.
    """
    require_same_shape(y_gt, y_dnn)
    err = avg_pool8(ImagePlane(np.abs(y_gt.pixels - y_dnn.pixels)))
    return ConfidenceMap(np.clip(1.0 - err.pixels / SIGMA_MAX, 0.0, 1.0))


def _region_stats(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-8x8-region (mean, std) grids."""
    h, w = pixels.shape
    blocks = pixels.reshape(h // 8, 8, w // 8, 8)
    return blocks.mean(axis=(1, 3)), blocks.std(axis=(1, 3))


def region_features(noisy: ImagePlane, filtered: ImagePlane, noise_map: ImagePlane) -> np.ndarray:
    """Per-region feature grid of shape (grid_h, grid_w, 5).

    Features: residual texture std, |noise-map mean|, deviation of the
    noise-map std from its global median (AWGN consistency), level-1 Haar
    detail energy of the deep output, and mean intensity / 255.
    """
    require_same_shape(noisy, filtered)
    require_same_shape(noisy, noise_map)
    h, w = noisy.shape
    if h % 8 != 0 or w % 8 != 0:
        raise ValueError(f"features need dimensions divisible by 8, got {w}x{h}")

    _, residual_std = _region_stats(noisy.pixels - filtered.pixels)
    map_mean, map_std = _region_stats(noise_map.pixels)
    std_dev = np.abs(map_std - np.median(map_std))

    denoised = noisy.pixels - noise_map.pixels
    tiles = denoised.reshape(h // 8, 8, w // 8, 8).swapaxes(1, 2)
    _, details = dwt2_array(tiles, 1, "haar")
    h_band, v_band, d_band = details[0]
    detail_energy = (h_band**2 + v_band**2 + d_band**2).sum(axis=(-2, -1))

    mean_level, _ = _region_stats(noisy.pixels)
    return np.stack(
        [residual_std, np.abs(map_mean), std_dev, detail_energy, mean_level / 255.0], axis=-1
    )


@dataclass(frozen=True, eq=False)
class ConfidenceModel:
    """Linear ridge model on standardized region features."""

    weights: np.ndarray
    intercept: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _freeze(self.weights))
        object.__setattr__(self, "feature_mean", _freeze(self.feature_mean))
        object.__setattr__(self, "feature_scale", _freeze(self.feature_scale))
        k = self.weights.shape[0]
        if self.feature_mean.shape != (k,) or self.feature_scale.shape != (k,):
            raise ValueError("weights and normalization constants disagree on feature count")

    @property
    def feature_count(self) -> int:
        return self.weights.shape[0]


def _stack_training_data(
    features: list[np.ndarray] | np.ndarray, targets: list[ConfidenceMap] | ConfidenceMap
) -> tuple[np.ndarray, np.ndarray]:
    feature_grids = [features] if isinstance(features, np.ndarray) else list(features)
    target_maps = [targets] if isinstance(targets, ConfidenceMap) else list(targets)
    if len(feature_grids) != len(target_maps):
        raise ValueError(f"{len(feature_grids)} feature grids but {len(target_maps)} target maps")
    xs, ys = [], []
    for grid, cmap in zip(feature_grids, target_maps):
        if grid.shape[:2] != cmap.values.shape:
            raise ValueError(f"feature grid {grid.shape[:2]} does not match map {cmap.values.shape}")
        xs.append(grid.reshape(-1, grid.shape[-1]))
        ys.append(cmap.values.reshape(-1))
    return np.concatenate(xs), np.concatenate(ys)


def fit_confidence_model(
    features: list[np.ndarray] | np.ndarray, targets: list[ConfidenceMap] | ConfidenceMap
) -> ConfidenceModel:
    """Ridge fit (lambda = 1e-3, intercept unregularized) on >= 100 regions.

    Features are standardized before the solve; a zero-variance feature is
    left centered with unit scale so it cannot blow up the system. The
    ridge term keeps the normal equations positive definite, with a
    pseudo-inverse fallback if the solve still fails numerically.
    """
    x, y = _stack_training_data(features, targets)
    n, k = x.shape
    if n < 100:
        raise ValueError(f"need at least 100 training regions, got {n}")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale > 0.0, scale, 1.0)
    z = (x - mean) / scale

    lhs = z.T @ z + _RIDGE_LAMBDA * np.eye(k)
    rhs = z.T @ (y - y.mean())
    try:
        weights = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        weights = np.linalg.pinv(lhs) @ rhs
    # z is centered, so the unregularized intercept is the target mean.
    return ConfidenceModel(
        weights=weights, intercept=float(y.mean()), feature_mean=mean, feature_scale=scale
    )


def predict_confidence(model: ConfidenceModel, features: np.ndarray) -> ConfidenceMap:
    """Linear prediction on standardized features, clamped to [0,1]."""
    if features.ndim != 3 or features.shape[-1] != model.feature_count:
        raise ValueError(
            f"expected feature grid with {model.feature_count} features, got shape {features.shape}"
        )
    z = (features - model.feature_mean) / model.feature_scale
    pred = z @ model.weights + model.intercept
    return ConfidenceMap(np.clip(pred, 0.0, 1.0))


def save_model(model: ConfidenceModel, path: str | Path) -> None:
    payload = {
        "kind": "ccid-confidence-model",
        "version": 1,
        "weights": [float(v) for v in model.weights],
        "intercept": model.intercept,
        "feature_mean": [float(v) for v in model.feature_mean],
        "feature_scale": [float(v) for v in model.feature_scale],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="ascii")


def load_model(path: str | Path) -> ConfidenceModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="ascii"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"could not read confidence model {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("kind") != "ccid-confidence-model":
        raise ValueError(f"{path} is not a confidence model file")
    return ConfidenceModel(
        weights=np.array(payload["weights"], dtype=np.float64),
        intercept=float(payload["intercept"]),
        feature_mean=np.array(payload["feature_mean"], dtype=np.float64),
        feature_scale=np.array(payload["feature_scale"], dtype=np.float64),
    )


def load_default_model() -> ConfidenceModel:
    """Load the surrogate shipped with the package.

    The bundled file is produced by scripts/make_default_model.py from the
    committed fixture set, so predictions from it are reproducible.
    """
    resource = importlib.resources.files("ccid") / "data" / "default_confidence_model.json"
    with importlib.resources.as_file(resource) as path:
        return load_model(path)


def render_overlay(conf: ConfidenceMap, threshold: float) -> np.ndarray:
    """Green-above, purple-below visualization, upsampled 8x, uint8 RGB.

    Intensity is the linear distance to the threshold: a region exactly at
    the threshold is black, confidence 1 is full green, confidence 0 is
    full purple (equal red and blue).
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0,1), got {threshold}")
    c = conf.values
    above = c >= threshold
    green = np.where(above, (c - threshold) / (1.0 - threshold), 0.0)
    purple = np.where(above, 0.0, (threshold - c) / threshold)
    rgb = np.stack([purple, green, purple], axis=-1)
    rgb_u8 = np.floor(np.clip(rgb * 255.0, 0.0, 255.0) + 0.5).astype(np.uint8)
    return np.repeat(np.repeat(rgb_u8, 8, axis=0), 8, axis=1)


def format_confidence(conf: ConfidenceMap) -> str:
    """Render the plain-text CMAP format (9 significant digits)."""
    lines = [f"{CMAP_MAGIC} {conf.grid_width} {conf.grid_height}"]
    for row in conf.values:
        lines.append(" ".join(f"{v:.9g}" for v in row))
    return "\n".join(lines) + "\n"


def save_confidence(conf: ConfidenceMap, path: str | Path) -> None:
    """Write the plain-text CMAP format."""
    Path(path).write_text(format_confidence(conf), encoding="ascii")


def confidence_from_text(text: str, origin: str = "cmap") -> ConfidenceMap:
    """Parse CMAP text; dimension or range violations are errors."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{origin}: empty confidence file")
    header = lines[0].split()
    if len(header) != 3 or header[0] != CMAP_MAGIC:
        raise ValueError(f"{origin}: bad header {lines[0]!r}, expected '{CMAP_MAGIC} <width> <height>'")
    try:
        width, height = int(header[1]), int(header[2])
    except ValueError as exc:
        raise ValueError(f"{origin}: non-integer dimensions in header {lines[0]!r}") from exc
    if width < 1 or height < 1:
        raise ValueError(f"{origin}: dimensions must be positive, got {width}x{height}")
    if len(lines) - 1 != height:
        raise ValueError(f"{origin}: expected {height} value rows, found {len(lines) - 1}")
    rows = []
    for i, line in enumerate(lines[1:]):
        try:
            row = [float(tok) for tok in line.split()]
        except ValueError as exc:
            raise ValueError(f"{origin}: non-numeric value on row {i}") from exc
        if len(row) != width:
            raise ValueError(f"{origin}: row {i} has {len(row)} values, expected {width}")
        rows.append(row)
    values = np.array(rows, dtype=np.float64)
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ValueError(f"{origin}: confidence values must lie in [0,1]")
    return ConfidenceMap(values)


def load_confidence(path: str | Path) -> ConfidenceMap:
    """Parse a CMAP file; dimension or range violations are errors."""
    return confidence_from_text(Path(path).read_text(encoding="ascii"), origin=str(path))
