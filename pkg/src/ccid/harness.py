"""Experiment harness: weight sweeps, robustness tables, confidence statistics.

Every run is a pure function of (ExperimentSpec, committed dataset files):
per-image noise seeds derive from the spec seed and the image's position in
the sorted listing, all aggregation orders are fixed, and CSV floats use
repr so reruns produce byte-identical outputs. Images are padded to 8x8
multiples on entry to the fusion stage and cropped back before metrics.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fusion
from .confidence import (
    ConfidenceMap,
    ConfidenceModel,
    fit_confidence_model,
    ground_truth_confidence,
    load_confidence,
    load_default_model,
    load_model,
    predict_confidence,
    region_features,
    save_confidence,
    save_model,
)
from .denoisers import DenoiserSpec, apply_denoiser, resolve_precomputed, run_deep_denoiser
from .fusion import FusionParams, fuse
from .image import ImagePlane, crop, load_image, pad_to_multiple8, save_image
from .metrics import MetricReport, compare, compare_8bit
from .noise import NoiseSpec, apply_noise, derive_seed, with_seed

DEFAULT_GRID = tuple(round(0.05 * k, 10) for k in range(21))
DEFAULT_SIGMAS = tuple(float(s) for s in range(0, 101, 10))
HISTOGRAM_BINS = 20

CONFIDENCE_SOURCES = ("oracle", "model", "external", "none")
METRIC_MODES = ("quantized", "float")
OOD_KINDS = ("data_domain", "noise_level", "noise_type")

# CSV and CLI speak short mode tokens; fusion uses the full names.
TOKEN_BY_MODE = {"dct": "dct", "dwt_global": "dwt", "dwt_confidence": "dwt-conf"}
MODE_BY_TOKEN = {token: mode for mode, token in TOKEN_BY_MODE.items()}


@dataclass(frozen=True)
class ConfidenceSource:
    """Where per-region confidence comes from during a run.

    kind 'oracle' compares against the clean image, 'model' evaluates a
    saved surrogate (empty path selects the bundled one), 'external' reads
    STEM.cmap files from a directory, 'none' disables guidance.
    """

    kind: str = "none"
    path: str = ""

    def __post_init__(self):
        if self.kind not in CONFIDENCE_SOURCES:
            raise ValueError(f"unknown confidence source {self.kind!r}")
        if self.kind == "external" and not self.path:
            raise ValueError("external confidence needs a directory path")


@dataclass(frozen=True)
class ExperimentSpec:
    """Complete description of one harness run."""

    dataset: str
    reliable: DenoiserSpec
    deep: DenoiserSpec
    noise: NoiseSpec | None = None
    modes: tuple[str, ...] = ("dct",)
    params: FusionParams = FusionParams(w=0.5)
    weights: tuple[float, ...] = DEFAULT_GRID
    confidence: ConfidenceSource = ConfidenceSource()
    metric_mode: str = "quantized"
    ood_kind: str = ""
    label: str = ""

    def __post_init__(self):
        if not self.dataset:
            raise ValueError("dataset path must be non-empty")
        if not self.modes:
            raise ValueError("at least one fusion mode is required")
        for mode in self.modes:
            if mode not in fusion.MODES:
                raise ValueError(f"unknown fusion mode {mode!r}")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("duplicate fusion modes")
        if not self.weights:
            raise ValueError("weight grid must be non-empty")
        for w in self.weights:
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weights must lie in [0,1], got {w}")
        if any(b <= a for a, b in zip(self.weights, self.weights[1:])):
            raise ValueError("weight grid must be strictly increasing")
        if self.metric_mode not in METRIC_MODES:
            raise ValueError(f"unknown metric mode {self.metric_mode!r}")
        if self.ood_kind and self.ood_kind not in OOD_KINDS:
            raise ValueError(f"unknown ood kind {self.ood_kind!r}")
        if "dwt_confidence" in self.modes and self.confidence.kind == "none":
            raise ValueError("dwt_confidence mode needs a confidence source")


@dataclass(frozen=True)
class PreparedImage:
    """One dataset image with its noisy/denoised planes, padded for fusion."""

    stem: str
    clean: ImagePlane
    clean_p: ImagePlane
    noisy_p: ImagePlane
    reliable_p: ImagePlane
    deep_p: ImagePlane
    conf: ConfidenceMap | None


@dataclass(frozen=True)
class SweepRow:
    w: float
    mode: str  # CSV token: dct | dwt | dwt-conf
    psnr_db: float
    ssim: float


@dataclass(frozen=True)
class OodRow:
    ood_kind: str
    label: str
    reliable_psnr: float
    reliable_ssim: float
    deep_psnr: float
    deep_ssim: float
    ccid_d_psnr: float
    ccid_d_ssim: float
    ccid_psnr: float
    ccid_ssim: float
    best_w: float


def list_dataset(path: str | Path) -> list[Path]:
    """Sorted .png/.pgm files directly under path; empty datasets are errors."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory {root} does not exist")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in (".png", ".pgm"))
    if not files:
        raise ValueError(f"dataset {root} contains no .png or .pgm images")
    return files


def _resolve_deep(spec: DenoiserSpec, image_path: Path) -> DenoiserSpec:
    # file:DIR selects DIR/STEM.png per image; file:FILE.png is used as-is.
    if spec.kind == "external_file" and Path(spec.path).is_dir():
        found = resolve_precomputed(spec.path, image_path.stem)
        return dataclasses.replace(spec, path=str(found))
    return spec


def _confidence_for(
    spec: ExperimentSpec,
    model: ConfidenceModel | None,
    stem: str,
    clean_p: ImagePlane,
    noisy_p: ImagePlane,
    reliable_p: ImagePlane,
    deep_p: ImagePlane,
) -> ConfidenceMap | None:
    source = spec.confidence
    if source.kind == "none":
        return None
    if source.kind == "oracle":
        return ground_truth_confidence(clean_p, deep_p)
    if source.kind == "model":
        noise_map = ImagePlane(noisy_p.pixels - deep_p.pixels)
        features = region_features(noisy_p, reliable_p, noise_map)
        return predict_confidence(model, features)
    conf = load_confidence(Path(source.path) / f"{stem}.cmap")
    expected = (clean_p.height // 8, clean_p.width // 8)
    if (conf.grid_height, conf.grid_width) != expected:
        raise ValueError(
            f"confidence map for {stem!r} is {conf.grid_height}x{conf.grid_width}, "
            f"expected {expected[0]}x{expected[1]}"
        )
    return conf


def _load_model_for(spec: ExperimentSpec) -> ConfidenceModel | None:
    if spec.confidence.kind != "model":
        return None
    if spec.confidence.path:
        return load_model(spec.confidence.path)
    return load_default_model()


def prepare_image(
    spec: ExperimentSpec, path: Path, index: int, model: ConfidenceModel | None = None
) -> PreparedImage:
    """Load, corrupt, denoise, and pad one dataset image."""
    clean = load_image(path)
    if spec.noise is not None:
        seed = derive_seed(spec.noise.seed, index)
        noisy = apply_noise(clean, with_seed(spec.noise, seed))
    else:
        noisy = clean
    reliable = apply_denoiser(spec.reliable, noisy)
    deep, _ = run_deep_denoiser(_resolve_deep(spec.deep, path), noisy)

    clean_p = pad_to_multiple8(clean)
    noisy_p = pad_to_multiple8(noisy)
    reliable_p = pad_to_multiple8(reliable)
    deep_p = pad_to_multiple8(deep)
    conf = _confidence_for(spec, model, path.stem, clean_p, noisy_p, reliable_p, deep_p)
    return PreparedImage(
        stem=path.stem,
        clean=clean,
        clean_p=clean_p,
        noisy_p=noisy_p,
        reliable_p=reliable_p,
        deep_p=deep_p,
        conf=conf,
    )


def prepare_dataset(spec: ExperimentSpec) -> list[PreparedImage]:
    model = _load_model_for(spec)
    files = list_dataset(spec.dataset)
    return [prepare_image(spec, path, index, model) for index, path in enumerate(files)]


def _measure(spec: ExperimentSpec, clean: ImagePlane, candidate: ImagePlane) -> MetricReport:
    if spec.metric_mode == "quantized":
        return compare_8bit(clean, candidate)
    return compare(clean, candidate)


def _fuse_one(
    spec: ExperimentSpec, prepared: PreparedImage, mode: str, w: float
) -> ImagePlane:
    params = dataclasses.replace(spec.params, mode=mode, w=w)
    fused_p = fuse(prepared.deep_p, prepared.reliable_p, params, prepared.conf)
    return crop(fused_p, prepared.clean.height, prepared.clean.width)


def _mean_metrics(
    spec: ExperimentSpec, prepared: list[PreparedImage], mode: str, w: float
) -> tuple[float, float, list[ImagePlane]]:
    fused_images = [_fuse_one(spec, item, mode, w) for item in prepared]
    reports = [
        _measure(spec, item.clean, fused) for item, fused in zip(prepared, fused_images)
    ]
    psnr_mean = float(np.mean([r.psnr_db for r in reports]))
    ssim_mean = float(np.mean([r.ssim for r in reports]))
    return psnr_mean, ssim_mean, fused_images


def format_weight(w: float) -> str:
    return f"{w:g}"


def weight_sweep(spec: ExperimentSpec, out_dir: str | Path | None = None) -> list[SweepRow]:
    """Mean PSNR/SSIM over the dataset at every (mode, weight) pair.

    With out_dir set, writes sweep.csv, every fused image as PNG, the
    confidence maps in CMAP text form, and the sweep figure.
    """
    prepared = prepare_dataset(spec)
    rows: list[SweepRow] = []
    fused_by_key: dict[tuple[str, str, float], ImagePlane] = {}
    for mode in spec.modes:
        token = TOKEN_BY_MODE[mode]
        for w in spec.weights:
            psnr_mean, ssim_mean, fused_images = _mean_metrics(spec, prepared, mode, w)
            rows.append(SweepRow(w=w, mode=token, psnr_db=psnr_mean, ssim=ssim_mean))
            if out_dir is not None:
                for item, fused in zip(prepared, fused_images):
                    fused_by_key[(item.stem, token, w)] = fused

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(
            out / "sweep.csv",
            ("w", "mode", "psnr_db", "ssim"),
            [(_fmt(r.w), r.mode, _fmt(r.psnr_db), _fmt(r.ssim)) for r in rows],
        )
        fused_dir = out / "fused"
        fused_dir.mkdir(exist_ok=True)
        for (stem, token, w), fused in fused_by_key.items():
            name = f"{stem}_{token}_w{format_weight(w)}.png"
            save_image(fused, fused_dir / name)
        if spec.confidence.kind != "none":
            conf_dir = out / "confidence"
            conf_dir.mkdir(exist_ok=True)
            for item in prepared:
                save_confidence(item.conf, conf_dir / f"{item.stem}.cmap")
        from . import plots

        plots.render_sweep(rows, out / "sweep_metrics.png")
    return rows


def ood_eval(specs: list[ExperimentSpec], out_dir: str | Path | None = None) -> list[OodRow]:
    """Robustness table: reliable alone, deep alone, fixed-w fusion, best-w fusion.

    Each entry must carry an ood_kind and a weight grid containing 0.5 so
    the default operating point is part of the comparison.
    """
    results: list[OodRow] = []
    for spec in specs:
        if not spec.ood_kind:
            raise ValueError("ood_eval specs need ood_kind set")
        if not any(abs(w - 0.5) < 1e-12 for w in spec.weights):
            raise ValueError("ood weight grid must include 0.5")
        mode = spec.modes[0]
        prepared = prepare_dataset(spec)

        rel_reports = [_measure(spec, p.clean, crop(p.reliable_p, p.clean.height, p.clean.width)) for p in prepared]
        deep_reports = [_measure(spec, p.clean, crop(p.deep_p, p.clean.height, p.clean.width)) for p in prepared]
        rel_psnr = float(np.mean([r.psnr_db for r in rel_reports]))
        rel_ssim = float(np.mean([r.ssim for r in rel_reports]))
        deep_psnr = float(np.mean([r.psnr_db for r in deep_reports]))
        deep_ssim = float(np.mean([r.ssim for r in deep_reports]))

        by_weight: dict[float, tuple[float, float]] = {}
        for w in spec.weights:
            psnr_mean, ssim_mean, _ = _mean_metrics(spec, prepared, mode, w)
            by_weight[w] = (psnr_mean, ssim_mean)
        half = min(by_weight, key=lambda w: abs(w - 0.5))
        best_w = max(by_weight, key=lambda w: (by_weight[w][0], -w))
        label = spec.label or spec.ood_kind
        results.append(
            OodRow(
                ood_kind=spec.ood_kind,
                label=label,
                reliable_psnr=rel_psnr,
                reliable_ssim=rel_ssim,
                deep_psnr=deep_psnr,
                deep_ssim=deep_ssim,
                ccid_d_psnr=by_weight[half][0],
                ccid_d_ssim=by_weight[half][1],
                ccid_psnr=by_weight[best_w][0],
                ccid_ssim=by_weight[best_w][1],
                best_w=best_w,
            )
        )

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        header = (
            "ood_kind", "label",
            "reliable_psnr", "reliable_ssim",
            "deep_psnr", "deep_ssim",
            "ccid_d_psnr", "ccid_d_ssim",
            "ccid_psnr", "ccid_ssim", "best_w",
        )
        _write_csv(
            out / "ood.csv",
            header,
            [
                (
                    r.ood_kind, r.label,
                    _fmt(r.reliable_psnr), _fmt(r.reliable_ssim),
                    _fmt(r.deep_psnr), _fmt(r.deep_ssim),
                    _fmt(r.ccid_d_psnr), _fmt(r.ccid_d_ssim),
                    _fmt(r.ccid_psnr), _fmt(r.ccid_ssim), _fmt(r.best_w),
                )
                for r in results
            ],
        )
        from . import plots

        plots.render_ood(results, out / "ood_psnr.png")
    return results


@dataclass(frozen=True)
class HistogramRow:
    denoiser: str  # reliable | deep
    sigma: float
    granularity: str  # region | image
    bin_lo: float
    bin_hi: float
    count: int


@dataclass(frozen=True)
class MeanConfidenceRow:
    denoiser: str
    sigma: float
    mean_confidence: float


def confidence_distribution(
    spec: ExperimentSpec,
    out_dir: str | Path | None = None,
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS,
) -> tuple[list[HistogramRow], list[MeanConfidenceRow]]:
    """Oracle confidence statistics as gaussian noise sweeps over sigmas.

    For every sigma and both denoisers the run histograms confidence at two
    granularities: one sample per 8x8 region, and one sample per image
    (the image's mean region confidence). Bin masses therefore sum to the
    region count and the image count respectively.
    """
    files = list_dataset(spec.dataset)
    base_seed = spec.noise.seed if spec.noise is not None else 0
    edges = np.linspace(0.0, 1.0, HISTOGRAM_BINS + 1)
    hist_rows: list[HistogramRow] = []
    mean_rows: list[MeanConfidenceRow] = []

    for s_index, sigma in enumerate(sigmas):
        per_denoiser_regions = {"reliable": [], "deep": []}
        per_denoiser_image_means = {"reliable": [], "deep": []}
        for i_index, path in enumerate(files):
            clean = load_image(path)
            noise = NoiseSpec(
                kind="gaussian", sigma=sigma, seed=derive_seed(base_seed, s_index, i_index)
            )
            noisy = apply_noise(clean, noise)
            clean_p = pad_to_multiple8(clean)
            for name, den_spec in (("reliable", spec.reliable), ("deep", spec.deep)):
                resolved = _resolve_deep(den_spec, path)
                output = apply_denoiser(resolved, noisy)
                conf = ground_truth_confidence(clean_p, pad_to_multiple8(output))
                per_denoiser_regions[name].append(conf.values.reshape(-1))
                per_denoiser_image_means[name].append(float(conf.values.mean()))
        for name in ("reliable", "deep"):
            regions = np.concatenate(per_denoiser_regions[name])
            image_means = np.array(per_denoiser_image_means[name])
            for granularity, values in (("region", regions), ("image", image_means)):
                counts, _ = np.histogram(values, bins=edges)
                for b in range(HISTOGRAM_BINS):
                    hist_rows.append(
                        HistogramRow(
                            denoiser=name,
                            sigma=sigma,
                            granularity=granularity,
                            bin_lo=float(edges[b]),
                            bin_hi=float(edges[b + 1]),
                            count=int(counts[b]),
                        )
                    )
            mean_rows.append(
                MeanConfidenceRow(
                    denoiser=name, sigma=sigma, mean_confidence=float(regions.mean())
                )
            )

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(
            out / "conf_hist.csv",
            ("denoiser", "sigma", "granularity", "bin_lo", "bin_hi", "count"),
            [
                (r.denoiser, _fmt(r.sigma), r.granularity,
                 f"{r.bin_lo:.2f}", f"{r.bin_hi:.2f}", str(r.count))
                for r in hist_rows
            ],
        )
        _write_csv(
            out / "conf_mean.csv",
            ("denoiser", "sigma", "mean_confidence"),
            [(r.denoiser, _fmt(r.sigma), _fmt(r.mean_confidence)) for r in mean_rows],
        )
        from . import plots

        plots.render_confidence_report(hist_rows, mean_rows, out / "conf_dist.png")
    return hist_rows, mean_rows


def train_confidence_model(
    spec: ExperimentSpec, out_path: str | Path | None = None
) -> tuple[ConfidenceModel, float]:
    """Fit the surrogate on oracle targets from the spec's dataset.

    Returns the model and its training mean absolute error. The spec must
    include a noise model, otherwise the features are degenerate.
    """
    if spec.noise is None:
        raise ValueError("training needs a noise spec")
    files = list_dataset(spec.dataset)
    features = []
    targets = []
    for index, path in enumerate(files):
        item = prepare_image(
            dataclasses.replace(spec, confidence=ConfidenceSource("none")), path, index
        )
        noise_map = ImagePlane(item.noisy_p.pixels - item.deep_p.pixels)
        features.append(region_features(item.noisy_p, item.reliable_p, noise_map))
        targets.append(ground_truth_confidence(item.clean_p, item.deep_p))
    model = fit_confidence_model(features, targets)
    errors = [
        float(np.abs(predict_confidence(model, f).values - t.values).mean())
        for f, t in zip(features, targets)
    ]
    mae = float(np.mean(errors))
    if out_path is not None:
        save_model(model, out_path)
    return model, mae


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_csv(path: Path, header: tuple[str, ...], rows: list[tuple[str, ...]]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
